//! Black-box classifiers seen only through batch probability predictions.

mod external;

pub use external::{ExternalPredictor, DEFAULT_BATCH_CAP, DEFAULT_TIMEOUT};

use crate::error::{Error, Result};
use crate::io::{Dataset, TimeSeries};

/// Tolerance on row sums of a probability matrix.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Row-stochastic matrix: one row per queried series, one column per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    rows: Vec<Vec<f64>>,
    classes: usize,
}

impl ProbMatrix {
    /// Validates shape, range and row sums.
    pub fn new(rows: Vec<Vec<f64>>, classes: usize) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != classes {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {classes}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Protocol(format!("row {i} has entry {v} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Protocol(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(ProbMatrix { rows, classes })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Index of the most probable class (0-based); ties go to the lower index.
    pub fn argmax(&self, i: usize) -> usize {
        let row = &self.rows[i];
        let mut best = 0;
        for (c, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = c;
            }
        }
        best
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }
}

/// A classifier exposing only class probabilities.
pub trait Predictor: Send + Sync {
    fn class_count(&self) -> usize;

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn class_count(&self) -> usize {
        (**self).class_count()
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        (**self).predict_proba(batch)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn class_count(&self) -> usize {
        (**self).class_count()
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        (**self).predict_proba(batch)
    }
}

/// Softmax over negative Euclidean distances to per-class mean series.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestCentroidModel {
    centroids: Vec<Vec<f64>>,
    temperature: f64,
}

impl NearestCentroidModel {
    pub fn new(centroids: Vec<Vec<f64>>, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Fit(format!("temperature {temperature} must be positive")));
        }
        let len = centroids
            .first()
            .ok_or_else(|| Error::Fit("no classes".into()))?
            .len();
        if centroids.iter().any(|c| c.len() != len) {
            return Err(Error::Fit("centroids differ in length".into()));
        }
        Ok(NearestCentroidModel {
            centroids,
            temperature,
        })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Class probabilities for a single series.
    pub fn proba_one(&self, x: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = self
            .centroids
            .iter()
            .map(|c| {
                let d = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                -d / self.temperature
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }
}

/// Fits class centroids as elementwise means of the training series.
pub fn fit_nearest_centroid(train: &Dataset, temperature: f64) -> Result<NearestCentroidModel> {
    let t = train.series_len();
    let mut centroids = Vec::with_capacity(train.class_count());
    for class in 1..=train.class_count() {
        let members = train.class_indices(class);
        if members.is_empty() {
            return Err(Error::Fit(format!("class {class} has no training instances")));
        }
        let mut mean = vec![0.0; t];
        for &i in &members {
            for (m, v) in mean.iter_mut().zip(train.instances()[i].values()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= members.len() as f64);
        centroids.push(mean);
    }
    NearestCentroidModel::new(centroids, temperature)
}

/// Nearest-centroid model with its temperature set by
/// [`calibrate_temperature`] on the training data.
pub fn fit_calibrated_centroid(train: &Dataset) -> Result<NearestCentroidModel> {
    let model = fit_nearest_centroid(train, 1.0)?;
    let t = calibrate_temperature(&model, train)?;
    NearestCentroidModel::new(model.centroids, t)
}

/// Confidence cap used by [`calibrate_temperature`].
pub const MAX_MEDIAN_CONFIDENCE: f64 = 0.99;

/// Temperature scaling: the temperature minimising the mean negative
/// log-likelihood of the labels of `data` under `model`, searched over
/// `[T_min, 1e3]`.
///
/// On separable data the likelihood keeps improving as `T → 0` and the
/// outputs harden to 0/1, which leaves a local surrogate nothing to fit.
/// `T_min` is therefore the smallest temperature at which the median
/// instance's top probability, against its runner-up alone, stays at
/// [`MAX_MEDIAN_CONFIDENCE`]. The objective is unimodal in `ln T`, so a
/// golden-section search suffices.
pub fn calibrate_temperature(model: &NearestCentroidModel, data: &Dataset) -> Result<f64> {
    if data.class_count() != model.centroids.len() || data.is_empty() {
        return Err(Error::Fit("calibration data does not match the model".into()));
    }
    let dists: Vec<Vec<f64>> = data
        .instances()
        .iter()
        .map(|x| {
            model
                .centroids
                .iter()
                .map(|c| c.iter().zip(x.values()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .collect()
        })
        .collect();
    let nll = |log_t: f64| {
        let t = log_t.exp();
        let mut total = 0.0;
        for (d, &label) in dists.iter().zip(data.labels()) {
            let logits: Vec<f64> = d.iter().map(|v| -v / t).collect();
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            total += lse - logits[label - 1];
        }
        total / dists.len() as f64
    };
    let mut gaps: Vec<f64> = dists
        .iter()
        .map(|d| {
            let mut s = d.clone();
            s.sort_by(f64::total_cmp);
            s.get(1).map_or(0.0, |second| second - s[0])
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    let median_gap = gaps[gaps.len() / 2];
    let cap = MAX_MEDIAN_CONFIDENCE;
    let t_min = (median_gap / (cap / (1.0 - cap)).ln()).clamp(1e-3, 1e3);

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (t_min.ln(), 1e3f64.ln());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (nll(c), nll(d));
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = nll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = nll(d);
        }
    }
    Ok((0.5 * (a + b)).exp())
}

impl Predictor for NearestCentroidModel {
    fn class_count(&self) -> usize {
        self.centroids.len()
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        let t = self.centroids[0].len();
        if let Some(pos) = batch.iter().position(|s| s.len() != t) {
            return Err(Error::Shape(format!(
                "series {pos} has length {}, model expects {t}",
                batch[pos].len()
            )));
        }
        let rows = batch.iter().map(|s| self.proba_one(s)).collect();
        ProbMatrix::new(rows, self.class_count())
    }
}

/// Predicts the same distribution for every input.
#[derive(Debug, Clone)]
pub struct ConstantPredictor {
    probs: Vec<f64>,
}

impl ConstantPredictor {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        ProbMatrix::new(vec![probs.clone()], probs.len())?;
        Ok(ConstantPredictor { probs })
    }

    pub fn uniform(classes: usize) -> Self {
        ConstantPredictor {
            probs: vec![1.0 / classes as f64; classes],
        }
    }
}

impl Predictor for ConstantPredictor {
    fn class_count(&self) -> usize {
        self.probs.len()
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        ProbMatrix::new(vec![self.probs.clone(); batch.len()], self.probs.len())
    }
}

/// Adapts a closure `series -> probability row` into a [`Predictor`].
pub struct FnPredictor<F> {
    classes: usize,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(classes: usize, f: F) -> Self {
        FnPredictor { classes, f }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn class_count(&self) -> usize {
        self.classes
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        ProbMatrix::new(batch.iter().map(|s| (self.f)(s)).collect(), self.classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn data(rows: &[(&[f64], i64)]) -> Dataset {
        Dataset::from_raw_labels(
            "t",
            rows.iter().map(|(v, _)| ts(v)).collect(),
            rows.iter().map(|(_, l)| *l).collect(),
        )
        .unwrap()
    }

    #[test]
    fn centroid_is_class_mean() {
        let d = data(&[(&[0.0, 0.0], 1), (&[2.0, 2.0], 1), (&[5.0, 5.0], 2)]);
        let m = fit_nearest_centroid(&d, 1.0).unwrap();
        assert_eq!(m.centroids()[0], vec![1.0, 1.0]);
        assert_eq!(m.centroids()[1], vec![5.0, 5.0]);
    }

    #[test]
    fn identical_classes_predict_uniform() {
        let d = data(&[(&[1.0, 2.0], 1), (&[1.0, 2.0], 2)]);
        let m = fit_nearest_centroid(&d, 1.0).unwrap();
        let p = m.predict_proba(&[ts(&[7.0, -3.0])]).unwrap();
        assert!((p.row(0)[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn query_at_centroid_dominates() {
        let m = NearestCentroidModel::new(vec![vec![0.0; 4], vec![10.0; 4]], 0.5).unwrap();
        let p = m.predict_proba(&[ts(&[10.0; 4])]).unwrap();
        assert_eq!(p.argmax(0), 1);
        assert!(p.row(0)[1] > 0.99);
    }

    #[test]
    fn equidistant_query_is_even() {
        let m = NearestCentroidModel::new(vec![vec![0.0, 0.0], vec![2.0, 2.0]], 1.0).unwrap();
        let p = m.predict_proba(&[ts(&[1.0, 1.0])]).unwrap();
        assert!((p.row(0)[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn batch_rows_are_stochastic() {
        let m = NearestCentroidModel::new(vec![vec![0.0; 3], vec![1.0; 3], vec![-2.0; 3]], 0.7).unwrap();
        let p = m
            .predict_proba(&[ts(&[0.1, 0.2, 0.3]), ts(&[1.0, 1.0, 0.0]), ts(&[-9.0, 4.0, 2.0])])
            .unwrap();
        assert_eq!((p.len(), p.classes()), (3, 3));
        for r in p.rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let m = NearestCentroidModel::new(vec![vec![0.0; 3]], 1.0).unwrap();
        assert!(matches!(m.predict_proba(&[ts(&[1.0, 2.0])]), Err(Error::Shape(_))));
    }

    #[test]
    fn calibration_minimises_nll() {
        // Overlapping classes: neither a near-zero nor a huge temperature fits.
        let d = data(&[
            (&[0.0, 0.0], 1),
            (&[1.0, 1.0], 1),
            (&[3.0, 3.0], 1),
            (&[2.0, 2.0], 2),
            (&[4.0, 4.0], 2),
            (&[5.0, 5.0], 2),
        ]);
        let m = fit_nearest_centroid(&d, 1.0).unwrap();
        let t = calibrate_temperature(&m, &d).unwrap();
        let nll = |t: f64| {
            let m = NearestCentroidModel::new(m.centroids().to_vec(), t).unwrap();
            d.instances()
                .iter()
                .zip(d.labels())
                .map(|(x, &l)| -m.proba_one(x)[l - 1].ln())
                .sum::<f64>()
        };
        assert!(t > 1e-2 && t < 1e2, "{t}");
        assert!(nll(t) <= nll(t * 1.05) && nll(t) <= nll(t / 1.05));
    }

    #[test]
    fn separable_data_keeps_soft_outputs() {
        let d = data(&[(&[0.0, 0.0], 1), (&[0.5, 0.5], 1), (&[9.5, 9.5], 2), (&[10.0, 10.0], 2)]);
        let m = fit_calibrated_centroid(&d).unwrap();
        // Median distance gap is 9.5·√2; that instance is held at 0.99.
        let gap = 9.5 * 2f64.sqrt();
        assert!((m.temperature() - gap / 99f64.ln()).abs() < 1e-6, "{}", m.temperature());
        let p = m.proba_one(&[0.0, 0.0]);
        assert!(p[0] < 0.995);
    }

    #[test]
    fn non_stochastic_row_rejected() {
        let err = ProbMatrix::new(vec![vec![0.5, 0.5], vec![0.4, 0.4]], 2).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }
}
