//! Slow, direct reference implementations used to check the fast paths.
//!
//! Each oracle follows the textbook definition as literally as possible and
//! shares no code with the routine it checks.

use std::collections::BTreeSet;

use crate::l2gtx::{MergeResult, SelectedSet};
use crate::lomatce::LocalExplanation;

/// DTW by filling the full `(n+1) × (m+1)` cost matrix with an infinite
/// border and `D[0][0] = 0`, absolute-difference local cost.
pub fn dtw_full_matrix(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![f64::INFINITY; m + 1]; n + 1];
    d[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let best = d[i - 1][j].min(d[i][j - 1]).min(d[i - 1][j - 1]);
            d[i][j] = (a[i - 1] - b[j - 1]).abs() + best;
        }
    }
    d[n][m]
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Weighted ridge through the augmented normal equations
/// `(XᵀWX + diag(0, λ, …, λ)) [β₀; β] = XᵀWy` with `X = [1 | Z]`.
/// Returns `(intercept, coefficients)`.
pub fn ridge_normal_equations(z: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> Option<(f64, Vec<f64>)> {
    let k = z.first().map_or(0, Vec::len);
    let d = k + 1;
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for ((row, &yi), &wi) in z.iter().zip(y).zip(w) {
        let x: Vec<f64> = std::iter::once(1.0).chain(row.iter().copied()).collect();
        for r in 0..d {
            b[r] += wi * x[r] * yi;
            for c in 0..d {
                a[r][c] += wi * x[r] * x[c];
            }
        }
    }
    for j in 1..d {
        a[j][j] += lambda;
    }
    let sol = gauss_solve(a, b)?;
    Some((sol[0], sol[1..].to_vec()))
}

/// `1 − Σw(y−ŷ)² / Σw(y−ȳ)²` evaluated literally.
pub fn weighted_r2(y: &[f64], yhat: &[f64], w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    let ybar = (0..y.len()).map(|i| w[i] * y[i]).sum::<f64>() / sw;
    let res: f64 = (0..y.len()).map(|i| w[i] * (y[i] - yhat[i]) * (y[i] - yhat[i])).sum();
    let tot: f64 = (0..y.len()).map(|i| w[i] * (y[i] - ybar) * (y[i] - ybar)).sum();
    1.0 - res / tot
}

/// Greedy coverage by explicit set arithmetic: at every step, the candidate
/// whose still-uncovered member set carries the most importance; ties to the
/// lowest row; stop at the budget or when the best gain is not positive.
pub fn greedy_brute_force(m: &[Vec<f64>], importance: &[f64], budget: usize, epsilon: f64) -> Vec<usize> {
    let members: Vec<BTreeSet<usize>> = m
        .iter()
        .map(|row| (0..row.len()).filter(|&j| row[j].abs() > epsilon).collect())
        .collect();
    let mut covered = BTreeSet::new();
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < budget.min(m.len()) {
        let gains: Vec<(usize, f64)> = (0..m.len())
            .filter(|i| !picked.contains(i))
            .map(|i| (i, members[i].difference(&covered).map(|&j| importance[j]).sum()))
            .collect();
        let Some(max) = gains.iter().map(|g| g.1).reduce(f64::max) else { break };
        if max <= 0.0 {
            break;
        }
        let i = gains.iter().find(|g| g.1 == max).expect("max is attained").0;
        covered.extend(members[i].iter().copied());
        picked.push(i);
    }
    picked
}

/// `sqrt(Σ_i |M[i][j]|)` column by column.
pub fn importance_direct(m: &[Vec<f64>], clusters: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(clusters);
    for j in 0..clusters {
        let mut s = 0.0;
        for row in m {
            s += row[j].abs();
        }
        out.push(s.sqrt());
    }
    out
}

/// Mean, then population standard deviation around it.
pub fn two_pass_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Percentile as `(1 − g)·x_j + g·x_{j+1}` over the sorted values, with
/// `j + g = p/100 · (n − 1)`.
pub fn percentile_linear(values: &[f64], p: f64) -> f64 {
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let h = p / 100.0 * (x.len() - 1) as f64;
    let j = h.floor() as usize;
    let g = h - j as f64;
    if j + 1 >= x.len() {
        return x[x.len() - 1];
    }
    (1.0 - g) * x[j] + g * x[j + 1]
}

/// Average-linkage distance between two clusters as the mean over all
/// cross pairs.
pub fn average_linkage_distance(points: &[Vec<f64>], a: &[usize], b: &[usize]) -> f64 {
    let mut s = 0.0;
    for &i in a {
        for &j in b {
            s += points[i].iter().zip(&points[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        }
    }
    s / (a.len() * b.len()) as f64
}

/// Silhouette straight from the definition, averaged over all points.
pub fn silhouette_direct(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |i: usize, j: usize| {
        points[i].iter().zip(&points[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let clusters: BTreeSet<usize> = labels.iter().copied().collect();
    let mut total = 0.0;
    for i in 0..points.len() {
        let own: Vec<usize> = (0..points.len()).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(i, j)).sum::<f64>() / own.len() as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| {
                let other: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == c).collect();
                other.iter().map(|&j| dist(i, j)).sum::<f64>() / other.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / points.len() as f64
}

/// Per covered global cluster with events, `(global id, [(mean, std)])` over
/// its summary attributes. Events are gathered through the global
/// clusters' member lists rather than the row mapping.
pub fn aggregate_direct(
    selected: &SelectedSet,
    merge: &MergeResult,
    locals: &[LocalExplanation],
) -> Vec<(usize, Vec<(f64, f64)>)> {
    let chosen: BTreeSet<usize> = selected.instance_ids.iter().copied().collect();
    let mut out = Vec::new();
    for g in &merge.globals {
        if !selected.coverage[g.global_id] {
            continue;
        }
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); 2];
        for &(inst, cid) in &g.members {
            if !chosen.contains(&inst) {
                continue;
            }
            let local = locals.iter().find(|l| l.instance_id == inst).expect("member instance");
            let cluster = local.clusters.iter().find(|c| c.cluster_id == cid).expect("member cluster");
            for e in &cluster.events {
                for (slot, name) in g.kind.summary_attributes().iter().enumerate() {
                    values[slot].push(e.attribute(name).expect("attribute of kind"));
                }
            }
        }
        if values[0].is_empty() {
            continue;
        }
        out.push((g.global_id, values.iter().map(|v| two_pass_stats(v)).collect()));
    }
    out
}
