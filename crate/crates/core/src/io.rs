//! Labelled univariate time-series datasets: UCR-style loading, per-instance
//! standardisation and class-balanced sampling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Deref;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A finite univariate sequence of length at least 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "length {} is below the minimum of 2",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at index {pos}"
            )));
        }
        Ok(TimeSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let var = self.0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.0.len() as f64;
        var.sqrt()
    }

    /// Z-score with population variance. Constant series map to all zeros.
    pub fn standardized(&self) -> TimeSeries {
        let mean = self.mean();
        let std = self.std();
        if std <= f64::EPSILON * mean.abs().max(1.0) {
            return TimeSeries(vec![0.0; self.0.len()]);
        }
        TimeSeries(self.0.iter().map(|v| (v - mean) / std).collect())
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(values)
    }
}

impl From<TimeSeries> for Vec<f64> {
    fn from(ts: TimeSeries) -> Vec<f64> {
        ts.0
    }
}

/// Labelled instances sharing one length. Labels are contiguous `1..=class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    instances: Vec<TimeSeries>,
    labels: Vec<usize>,
    class_count: usize,
    /// Original label of each contiguous class id, indexed by `class - 1`.
    label_names: Vec<i64>,
}

impl Dataset {
    /// Builds a dataset from raw integer labels, remapping them to `1..=C`
    /// in ascending order of the raw value.
    pub fn from_raw_labels(
        name: impl Into<String>,
        instances: Vec<TimeSeries>,
        raw_labels: Vec<i64>,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::EmptyInput);
        }
        if instances.len() != raw_labels.len() {
            return Err(Error::Shape(format!(
                "{} instances but {} labels",
                instances.len(),
                raw_labels.len()
            )));
        }
        let len = instances[0].len();
        if let Some(pos) = instances.iter().position(|s| s.len() != len) {
            return Err(Error::Shape(format!(
                "instance {pos} has length {}, expected {len}",
                instances[pos].len()
            )));
        }
        let mut mapping = BTreeMap::new();
        for &raw in &raw_labels {
            mapping.entry(raw).or_insert(0usize);
        }
        for (i, v) in mapping.values_mut().enumerate() {
            *v = i + 1;
        }
        let labels = raw_labels.iter().map(|r| mapping[r]).collect();
        Ok(Dataset {
            name: name.into(),
            instances,
            labels,
            class_count: mapping.len(),
            label_names: mapping.keys().copied().collect(),
        })
    }

    pub fn instances(&self) -> &[TimeSeries] {
        &self.instances
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn label_names(&self) -> &[i64] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.instances[0].len()
    }

    /// Indices of the instances of `class` (1-based), in dataset order.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Indices chosen by [`sample_per_class`], grouped class by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub per_class_count: usize,
    /// `by_class[c - 1]` holds the dataset indices drawn for class `c`.
    pub by_class: Vec<Vec<usize>>,
}

impl InstanceSet {
    pub fn indices(&self) -> Vec<usize> {
        self.by_class.iter().flatten().copied().collect()
    }

    pub fn total(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }
}

/// Parses UCR-style delimited text: one instance per line, label first.
pub fn parse_ucr(name: &str, text: &str) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;

    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        let delim = if line.contains('\t') { '\t' } else { ',' };
        let fields: Vec<&str> = line.split(delim).map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::Format {
                line: lineno,
                message: format!("expected a label and at least 2 values, found {} fields", fields.len()),
            });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("row has {} values, expected {}", fields.len() - 1, w - 1),
                })
            }
            _ => {}
        }
        let label = parse_label(fields[0]).ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("label {:?} is not an integer", fields[0]),
        })?;
        let values = fields[1..]
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: format!("cell {} ({cell:?}) is not a finite number", col + 2),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        instances.push(TimeSeries(values));
        labels.push(label);
    }
    if instances.is_empty() {
        return Err(Error::EmptyInput);
    }
    Dataset::from_raw_labels(name, instances, labels)
}

fn parse_label(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    let v = cell.parse::<f64>().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)
}

/// Loads a UCR-style file. The dataset is named after the file stem with
/// any `_TRAIN`/`_TEST` suffix removed.
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    let name = stem
        .strip_suffix("_TRAIN")
        .or_else(|| stem.strip_suffix("_TEST"))
        .unwrap_or(&stem)
        .to_owned();
    parse_ucr(&name, &text)
}

/// Serialises with tab delimiters and shortest round-trip float formatting,
/// using the original label values.
pub fn to_ucr_string(d: &Dataset) -> String {
    let mut out = String::new();
    for (series, &label) in d.instances.iter().zip(&d.labels) {
        let _ = write!(out, "{}", d.label_names[label - 1]);
        for v in series.values() {
            let _ = write!(out, "\t{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn write_ucr_tsv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_ucr_string(d))?;
    Ok(())
}

/// Per-instance z-score normalisation.
pub fn standardize(d: &Dataset) -> Dataset {
    Dataset {
        instances: d.instances.iter().map(TimeSeries::standardized).collect(),
        ..d.clone()
    }
}

/// Draws `n_inst` distinct instances of every class, uniformly without
/// replacement. Each class uses its own random stream derived from `seed`.
pub fn sample_per_class(d: &Dataset, n_inst: usize, seed: u64) -> Result<InstanceSet> {
    if n_inst == 0 {
        return Err(Error::Domain("n_inst must be positive".into()));
    }
    let mut by_class = Vec::with_capacity(d.class_count);
    for class in 1..=d.class_count {
        let members = d.class_indices(class);
        if members.len() < n_inst {
            return Err(Error::InsufficientInstances {
                class,
                available: members.len(),
                requested: n_inst,
            });
        }
        let mut rng = rng::derived_rng(seed, class as u64);
        let picked = index::sample(&mut rng, members.len(), n_inst)
            .into_iter()
            .map(|i| members[i])
            .collect();
        by_class.push(picked);
    }
    Ok(InstanceSet {
        per_class_count: n_inst,
        by_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn minimal_line_parses() {
        let d = parse_ucr("x", "1\t0.0\t1.0\n").unwrap();
        assert_eq!((d.len(), d.class_count(), d.series_len()), (1, 1, 2));
    }

    #[test]
    fn ragged_row_names_line_two() {
        let err = parse_ucr("x", "1,1,2,3,4,5\n2,1,2,3,4,5,6\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_numeric_cell_is_parse_error() {
        let err = parse_ucr("x", "1\t0.5\tabc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_empty_input() {
        assert!(matches!(parse_ucr("x", "\n\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn labels_are_remapped_contiguously() {
        let d = parse_ucr("x", "-1\t0\t1\n1\t1\t0\n-1\t2\t2\n").unwrap();
        assert_eq!(d.labels(), &[1, 2, 1]);
        assert_eq!(d.label_names(), &[-1, 1]);
        let d = parse_ucr("x", "1.0,0,1\n3.0,1,0\n").unwrap();
        assert_eq!(d.labels(), &[1, 2]);
    }

    #[test]
    fn standardize_progression() {
        let z = ts(&[1.0, 2.0, 3.0]).standardized();
        let s = (1.5f64).sqrt();
        for (a, b) in z.values().iter().zip([-s, 0.0, s]) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn standardize_constant_is_zero() {
        assert_eq!(ts(&[5.0, 5.0, 5.0]).standardized().values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_is_idempotent() {
        let once = ts(&[0.3, -1.2, 4.0, 2.2, 0.0]).standardized();
        let twice = once.standardized();
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_or_nonfinite_series() {
        assert!(TimeSeries::new(vec![1.0]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
    }

    fn two_class(n: usize) -> Dataset {
        let instances = (0..2 * n).map(|i| ts(&[i as f64, 0.0])).collect();
        let labels = (0..2 * n).map(|i| (i % 2) as i64).collect();
        Dataset::from_raw_labels("t", instances, labels).unwrap()
    }

    #[test]
    fn sampling_counts_and_determinism() {
        let d = two_class(20);
        let a = sample_per_class(&d, 15, 3).unwrap();
        assert_eq!(a.total(), 30);
        assert!(a.by_class.iter().all(|c| c.len() == 15));
        assert_eq!(a, sample_per_class(&d, 15, 3).unwrap());
    }

    #[test]
    fn exhaustive_sampling_returns_whole_class() {
        let d = two_class(4);
        let s = sample_per_class(&d, 4, 0).unwrap();
        let mut c1 = s.by_class[0].clone();
        c1.sort_unstable();
        assert_eq!(c1, d.class_indices(1));
    }

    #[test]
    fn insufficient_instances_names_class() {
        let d = two_class(3);
        match sample_per_class(&d, 4, 0) {
            Err(Error::InsufficientInstances { class: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
