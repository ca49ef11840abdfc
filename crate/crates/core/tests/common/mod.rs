#![allow(dead_code)]

use std::path::{Path, PathBuf};

use l2gtx::io::{load_ucr_tsv, write_ucr_tsv};
use l2gtx::{synthetic, Dataset};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// `python3 tests/fixtures/adapter.py <args>` as a command line.
pub fn adapter_command(args: &str) -> String {
    format!("python3 {} {args}", fixture("adapter.py").display())
}

/// The ECG200 training split when `L2GTX_ECG200` points at it, otherwise
/// the synthetic stand-in. The second value says which.
pub fn ecg200() -> (Dataset, &'static str) {
    match std::env::var_os("L2GTX_ECG200") {
        Some(p) => (load_ucr_tsv(p).expect("L2GTX_ECG200 is a readable UCR file"), "ECG200"),
        None => (synthetic::ecg_like(0), "synthetic ECG200 stand-in"),
    }
}

/// Writes `d` as `<dir>/<name>_TRAIN.tsv`.
pub fn write_dataset(d: &Dataset, dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}_TRAIN.tsv"));
    write_ucr_tsv(d, &path).unwrap();
    path
}

use std::collections::HashMap;

use l2gtx::lomatce::{explain_instance, explain_instance_traced, LomatceConfig};
use l2gtx::predictor::{ConstantPredictor, FnPredictor};
use l2gtx::TimeSeries;

/// Outcome of one planted-surrogate trial.
#[derive(Debug)]
pub struct Planted {
    pub planted: usize,
    pub top1: Option<usize>,
    pub fidelity: Option<f64>,
}

impl Planted {
    pub fn recovered(&self) -> bool {
        self.top1 == Some(self.planted) && self.fidelity.is_some_and(|f| f >= 0.99)
    }
}

fn key(s: &[f64]) -> Vec<u64> {
    s.iter().map(|v| v.to_bits()).collect()
}

/// Plants a black box whose probability for class 1 is an affine function
/// of the event count of one cluster, then explains `x` again.
///
/// Neighbourhood, events and clustering depend only on `x`, the config and
/// the seed, so a first pass with a constant model reveals the design
/// matrix. The planted column is the one with the largest weighted count
/// variance; the black box looks each neighbourhood sample up by value.
pub fn planted_trial(x: &TimeSeries, cfg: &LomatceConfig, seed: u64) -> Option<Planted> {
    let (_, trace) = explain_instance_traced(x, 0, &ConstantPredictor::uniform(2), cfg, seed).ok()?;
    let design = trace.design;
    let k = design.first()?.len();
    let w = &trace.weights;
    let sw: f64 = w.iter().sum();
    let var = |j: usize| {
        let m = design.iter().zip(w).map(|(r, wi)| wi * r[j]).sum::<f64>() / sw;
        design.iter().zip(w).map(|(r, wi)| wi * (r[j] - m).powi(2)).sum::<f64>() / sw
    };
    let planted = (0..k).max_by(|&a, &b| var(a).total_cmp(&var(b)).then(b.cmp(&a)))?;
    let mean = design.iter().map(|r| r[planted]).sum::<f64>() / design.len() as f64;
    let spread = design.iter().map(|r| (r[planted] - mean).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return None;
    }
    let alpha = 0.4 / spread;
    let table: HashMap<Vec<u64>, f64> = trace
        .neighbourhood
        .samples
        .iter()
        .zip(&design)
        .map(|(s, r)| (key(s), 0.5 + alpha * (r[planted] - mean)))
        .collect();
    let f = FnPredictor::new(2, move |s: &[f64]| {
        let p = table[&key(s)];
        vec![p, 1.0 - p]
    });
    let e = explain_instance(x, 0, &f, cfg, seed).ok()?;
    Some(Planted {
        planted,
        top1: e.clusters.first().map(|c| c.cluster_id),
        fidelity: e.fidelity,
    })
}
