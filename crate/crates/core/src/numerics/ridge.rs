//! Weighted ridge regression with an unpenalised intercept, and weighted R².

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default regulariser.
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// The penalised normal matrix was singular; the minimum-norm solution
    /// was returned.
    pub rank_deficient: bool,
}

impl RidgeFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(z, b)| z * b).sum::<f64>()
    }
}

/// Minimises `Σ wᵢ (yᵢ − β₀ − zᵢ·β)² + λ‖β‖²`.
///
/// The intercept is eliminated by weighted centring, leaving the
/// `K × K` system `(Z̃ᵀWZ̃ + λI) β = Z̃ᵀW ỹ`, solved by Cholesky. When that
/// matrix is singular (only possible for `λ = 0`) the minimum-norm
/// least-squares solution is taken from an SVD instead.
pub fn weighted_ridge(z: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> Result<RidgeFit> {
    let n = y.len();
    if z.len() != n || w.len() != n {
        return Err(Error::Shape(format!(
            "{} design rows, {} targets, {} weights",
            z.len(),
            n,
            w.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must be finite and >= 0")));
    }
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Domain("weights must be finite and nonnegative".into()));
    }
    let w_sum: f64 = w.iter().sum();
    if w_sum <= 0.0 {
        return Err(Error::Domain("all weights are zero".into()));
    }
    let k = z.first().map_or(0, Vec::len);
    if z.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("ragged design matrix".into()));
    }

    let y_mean = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w_sum;
    let mut z_mean = vec![0.0; k];
    for (row, &wi) in z.iter().zip(w) {
        for (m, v) in z_mean.iter_mut().zip(row) {
            *m += wi * v;
        }
    }
    z_mean.iter_mut().for_each(|m| *m /= w_sum);
    if k == 0 {
        return Ok(RidgeFit {
            coefficients: Vec::new(),
            intercept: y_mean,
            rank_deficient: false,
        });
    }

    // sqrt(w)-scaled centred design and target.
    let xs = DMatrix::from_fn(n, k, |i, j| w[i].sqrt() * (z[i][j] - z_mean[j]));
    let ys = DVector::from_fn(n, |i, _| w[i].sqrt() * (y[i] - y_mean));
    let mut gram = xs.transpose() * &xs;
    for j in 0..k {
        gram[(j, j)] += lambda;
    }
    let rhs = xs.transpose() * &ys;

    let scale = (0..k).map(|j| gram[(j, j)]).fold(0.0f64, f64::max).max(1.0);
    let (beta, rank_deficient) = match gram.clone().cholesky() {
        // Pivots below sqrt(1e-10 · scale) mean a condition number past ~1e10.
        Some(ch) if min_pivot(&ch.l()).powi(2) > 1e-10 * scale => (ch.solve(&rhs), false),
        _ => {
            let eps = 1e-12 * scale;
            let svd = gram.svd(true, true);
            let sol = svd
                .solve(&rhs, eps)
                .map_err(|e| Error::Fit(format!("SVD solve failed: {e}")))?;
            (sol, true)
        }
    };
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = y_mean - coefficients.iter().zip(&z_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(RidgeFit {
        coefficients,
        intercept,
        rank_deficient,
    })
}

fn min_pivot(l: &DMatrix<f64>) -> f64 {
    (0..l.nrows()).map(|i| l[(i, i)].abs()).fold(f64::INFINITY, f64::min)
}

/// Weighted coefficient of determination, `1 − SS_res / SS_tot` with
/// weighted sums around the weighted mean. `None` when the weighted target
/// variance is zero.
pub fn r_squared(y_true: &[f64], y_pred: &[f64], w: &[f64]) -> Result<Option<f64>> {
    if y_true.len() != y_pred.len() || y_true.len() != w.len() {
        return Err(Error::Shape("r_squared inputs differ in length".into()));
    }
    let w_sum: f64 = w.iter().sum();
    if w_sum <= 0.0 {
        return Ok(None);
    }
    let mean = y_true.iter().zip(w).map(|(y, wi)| y * wi).sum::<f64>() / w_sum;
    let ss_tot: f64 = y_true.iter().zip(w).map(|(y, wi)| wi * (y - mean).powi(2)).sum();
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .zip(w)
        .map(|((y, p), wi)| wi * (y - p).powi(2))
        .sum();
    let scale = y_true.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if ss_tot <= 1e-24 * scale * scale * w_sum {
        return Ok(None);
    }
    Ok(Some(1.0 - ss_res / ss_tot))
}
