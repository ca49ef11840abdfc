use serde::{Deserialize, Serialize};

use super::cluster::{build_event_matrix, cluster_events, EventClustering};
use super::events::{extract_peps, ParameterisedEvent, Pep, PepKind};
use super::perturb::{distances, kernel_weights, perturb_neighbourhood, resolve_sigma, Neighbourhood};
use super::LomatceConfig;
use crate::error::{Error, Result};
use crate::io::TimeSeries;
use crate::numerics::{r_squared, weighted_ridge};
use crate::predictor::Predictor;
use crate::rng;

/// One retained local cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalClusterInfo {
    /// Design-matrix column of the cluster.
    pub cluster_id: usize,
    pub kind: PepKind,
    /// Mean event parameters of the cluster, raw units.
    pub centroid: Vec<f64>,
    /// Signed surrogate coefficient.
    pub importance: f64,
    /// Events of the unperturbed instance that fall in this cluster.
    pub events: Vec<Pep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExplanation {
    pub instance_id: usize,
    /// 1-based class the black box assigns to the instance.
    pub predicted_class: usize,
    /// Weighted R² of the surrogate; `None` when the target is constant or
    /// there were no events.
    pub fidelity: Option<f64>,
    /// Top clusters by `|importance|`, descending.
    pub clusters: Vec<LocalClusterInfo>,
    pub full_coefficients: Vec<f64>,
    pub intercept: f64,
    pub rank_deficient: bool,
}

/// Intermediate products of an explanation, for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct Trace {
    pub neighbourhood: Neighbourhood,
    pub distances: Vec<f64>,
    pub sigma: f64,
    pub weights: Vec<f64>,
    pub events: Vec<ParameterisedEvent>,
    pub clustering: Option<EventClustering>,
    pub design: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub fitted: Vec<f64>,
}

pub fn explain_instance<P: Predictor + ?Sized>(
    x: &TimeSeries,
    instance_id: usize,
    f: &P,
    cfg: &LomatceConfig,
    seed: u64,
) -> Result<LocalExplanation> {
    explain_instance_traced(x, instance_id, f, cfg, seed).map(|(e, _)| e)
}

/// Like [`explain_instance`], also returning every intermediate product.
///
/// Neighbourhood, events and clustering depend only on `x`, `cfg` and
/// `seed`, never on the predictor.
pub fn explain_instance_traced<P: Predictor + ?Sized>(
    x: &TimeSeries,
    instance_id: usize,
    f: &P,
    cfg: &LomatceConfig,
    seed: u64,
) -> Result<(LocalExplanation, Trace)> {
    let neighbourhood = perturb_neighbourhood(x, cfg.n_samples, cfg.n_segments, rng::derive(seed, 1))?;
    let dist = distances(x, &neighbourhood.samples, cfg.dtw_radius)?;
    let sigma = resolve_sigma(cfg.sigma, &dist)?;
    let weights = kernel_weights(&dist, sigma);

    let mut events = Vec::new();
    for (s, z) in neighbourhood.samples.iter().enumerate() {
        events.extend(extract_peps(z, &cfg.pep).events.into_iter().map(|pep| ParameterisedEvent {
            pep,
            source_sample: s,
        }));
    }

    let probs = f.predict_proba(&neighbourhood.samples)?;
    if probs.len() != neighbourhood.len() {
        return Err(Error::Protocol(format!(
            "predictor returned {} rows for {} samples",
            probs.len(),
            neighbourhood.len()
        )));
    }
    let predicted = probs.argmax(0);
    let targets = probs.column(predicted);

    let mut trace = Trace {
        neighbourhood,
        distances: dist,
        sigma,
        weights,
        events,
        clustering: None,
        design: Vec::new(),
        targets,
        fitted: Vec::new(),
    };

    if trace.events.is_empty() {
        let explanation = LocalExplanation {
            instance_id,
            predicted_class: predicted + 1,
            fidelity: None,
            clusters: Vec::new(),
            full_coefficients: Vec::new(),
            intercept: weighted_mean(&trace.targets, &trace.weights),
            rank_deficient: false,
        };
        return Ok((explanation, trace));
    }

    let clustering = cluster_events(&trace.events, &cfg.clustering, rng::derive(seed, 2))?;
    let design = build_event_matrix(trace.neighbourhood.len(), &trace.events, &clustering)?;
    let (coefficients, intercept, rank_deficient) =
        fit_surrogate(&design, &trace.targets, &trace.weights, cfg.lambda, cfg.standardize_columns)?;
    let fitted: Vec<f64> = design
        .iter()
        .map(|row| intercept + row.iter().zip(&coefficients).map(|(z, b)| z * b).sum::<f64>())
        .collect();
    let fidelity = r_squared(&trace.targets, &fitted, &trace.weights)?;

    let mut order: Vec<usize> = (0..coefficients.len()).collect();
    order.sort_by(|&a, &b| coefficients[b].abs().total_cmp(&coefficients[a].abs()).then(a.cmp(&b)));
    let clusters = order
        .into_iter()
        .take(cfg.top_n)
        .map(|col| {
            let (kc, local) = clustering.column(col).expect("column within clustering");
            let events = trace
                .events
                .iter()
                .zip(&clustering.event_column)
                .filter(|(e, &c)| c == col && e.source_sample == 0)
                .map(|(e, _)| e.pep)
                .collect();
            LocalClusterInfo {
                cluster_id: col,
                kind: kc.kind,
                centroid: kc.centroids[local].clone(),
                importance: coefficients[col],
                events,
            }
        })
        .collect();

    trace.clustering = Some(clustering);
    trace.design = design;
    trace.fitted = fitted;
    Ok((
        LocalExplanation {
            instance_id,
            predicted_class: predicted + 1,
            fidelity,
            clusters,
            full_coefficients: coefficients,
            intercept,
            rank_deficient,
        },
        trace,
    ))
}

fn weighted_mean(v: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total
}

/// Ridge fit in raw count units. With `standardize`, the penalty acts on
/// weighted z-scored columns; constant columns get a zero coefficient.
fn fit_surrogate(
    design: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    lambda: f64,
    standardize: bool,
) -> Result<(Vec<f64>, f64, bool)> {
    if !standardize {
        let fit = weighted_ridge(design, y, w, lambda)?;
        return Ok((fit.coefficients, fit.intercept, fit.rank_deficient));
    }
    let k = design.first().map_or(0, Vec::len);
    let w_sum: f64 = w.iter().sum();
    let mut mean = vec![0.0; k];
    for (row, wi) in design.iter().zip(w) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += wi * v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= w_sum);
    let mut std = vec![0.0; k];
    for (row, wi) in design.iter().zip(w) {
        for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
            *s += wi * (v - m) * (v - m);
        }
    }
    std.iter_mut().for_each(|s| *s = (*s / w_sum).sqrt());
    let live: Vec<usize> = (0..k).filter(|&j| std[j] > 1e-12).collect();
    let scaled: Vec<Vec<f64>> = design
        .iter()
        .map(|row| live.iter().map(|&j| (row[j] - mean[j]) / std[j]).collect())
        .collect();
    let fit = weighted_ridge(&scaled, y, w, lambda)?;
    let mut coefficients = vec![0.0; k];
    for (&j, b) in live.iter().zip(&fit.coefficients) {
        coefficients[j] = b / std[j];
    }
    let intercept = fit.intercept - live.iter().map(|&j| coefficients[j] * mean[j]).sum::<f64>();
    Ok((coefficients, intercept, fit.rank_deficient))
}
