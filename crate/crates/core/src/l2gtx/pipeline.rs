use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_events, global_faithfulness, AttributeStats};
use super::merge::{merge_clusters, MergeOptions};
use super::select::{build_matrix, global_importance, select_instances, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::io::{sample_per_class, Dataset, InstanceSet};
use crate::lomatce::{explain_instance, LocalExplanation, LomatceConfig, PepKind};
use crate::numerics::Linkage;
use crate::predictor::Predictor;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Instances sampled per class.
    pub n_inst: usize,
    /// Maximum number of representative instances per class.
    pub budget: usize,
    pub percentiles: Vec<f64>,
    pub seed: u64,
    pub epsilon: f64,
    pub linkage: Linkage,
    pub pooled_tau: bool,
    pub lomatce: LomatceConfig,
    /// Worker threads for local explanations; `None` uses every core.
    /// Results do not depend on it.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_inst: 15,
            budget: 15,
            percentiles: vec![95.0],
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            linkage: Linkage::Average,
            pooled_tau: false,
            lomatce: LomatceConfig::default(),
            jobs: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_inst == 0 || self.budget == 0 {
            return Err(Error::Config("n_inst and budget must be positive".into()));
        }
        if self.percentiles.is_empty() || self.percentiles.iter().any(|p| !(0.0..=100.0).contains(p)) {
            return Err(Error::Config("percentiles must be a non-empty subset of [0, 100]".into()));
        }
        if self.lomatce.n_samples < 2 || self.lomatce.top_n == 0 || self.lomatce.n_segments == 0 {
            return Err(Error::Config("samples, top_n and segments must be positive (samples >= 2)".into()));
        }
        if !(self.lomatce.lambda >= 0.0) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        Ok(())
    }

    fn merge_options(&self) -> MergeOptions {
        MergeOptions {
            linkage: self.linkage,
            pooled_tau: self.pooled_tau,
        }
    }
}

/// Local explanations of the sampled instances of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLocals {
    pub class: usize,
    pub explanations: Vec<LocalExplanation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalBatch {
    pub sample: InstanceSet,
    pub classes: Vec<ClassLocals>,
}

/// Seed of the explanation of dataset instance `instance_id`.
pub fn instance_seed(seed: u64, instance_id: usize) -> u64 {
    rng::derive(rng::derive(seed, 0x4c4f_4341), instance_id as u64)
}

/// Samples `n_inst` instances per class and explains each of them.
pub fn explain_locals<P: Predictor + ?Sized>(
    dataset: &Dataset,
    predictor: &P,
    cfg: &PipelineConfig,
) -> Result<LocalBatch> {
    cfg.validate()?;
    if predictor.class_count() != dataset.class_count() {
        return Err(Error::Config(format!(
            "predictor has {} classes, dataset has {}",
            predictor.class_count(),
            dataset.class_count()
        )));
    }
    let sample = sample_per_class(dataset, cfg.n_inst, rng::derive(cfg.seed, 0x5341_4d50))?;
    let work: Vec<(usize, usize)> = sample
        .by_class
        .iter()
        .enumerate()
        .flat_map(|(c, ids)| ids.iter().map(move |&i| (c + 1, i)))
        .collect();

    let run = || -> Vec<Result<LocalExplanation>> {
        work.par_iter()
            .map(|&(class, id)| {
                explain_instance(
                    &dataset.instances()[id],
                    id,
                    predictor,
                    &cfg.lomatce,
                    instance_seed(cfg.seed, id),
                )
                .map_err(|e| e.context(format!("class {class}, instance {id}")))
            })
            .collect()
    };
    let results = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut explanations = results.into_iter();
    let mut classes = Vec::new();
    for (c, ids) in sample.by_class.iter().enumerate() {
        let explanations = explanations.by_ref().take(ids.len()).collect::<Result<Vec<_>>>()?;
        classes.push(ClassLocals {
            class: c + 1,
            explanations,
        });
    }
    Ok(LocalBatch { sample, classes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCluster {
    pub global_id: usize,
    pub kind: PepKind,
    /// Global importance over the reported clusters, summing to one.
    pub normalised_importance: f64,
    pub global_importance: f64,
    pub event_count: usize,
    pub attributes: Vec<AttributeStats>,
    /// Merged centroid of the member local clusters, raw units.
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    pub class_label: usize,
    /// Label as written in the source data.
    pub class_name: i64,
    pub percentile: f64,
    pub clusters: Vec<SummaryCluster>,
    pub gf: f64,
    pub undefined_fidelities: usize,
    pub selected_instances: Vec<usize>,
    pub selection_gains: Vec<f64>,
    pub shortfall: usize,
    pub total_global_clusters: usize,
    pub global_clusters_by_kind: Vec<(PepKind, usize)>,
    pub covered_clusters: usize,
    pub omitted_empty_clusters: usize,
    pub config: PipelineConfig,
}

/// Steps 2-5 for one class at one merge percentile.
pub fn synthesize_class(
    locals: &ClassLocals,
    class_name: i64,
    p: f64,
    cfg: &PipelineConfig,
) -> Result<GlobalSummary> {
    let ctx = |e: Error| e.context(format!("class {} at p = {p}", locals.class));
    let explanations = &locals.explanations;
    let merge = merge_clusters(explanations, p, &cfg.merge_options()).map_err(ctx)?;
    let m = build_matrix(explanations, &merge).map_err(ctx)?;
    let importance = global_importance(&m);
    let selected = select_instances(&m, &importance, cfg.budget, cfg.epsilon).map_err(ctx)?;

    let (clusters, omitted, gf, undefined) = if selected.rows.is_empty() {
        // Nothing carries importance: fall back to scoring every instance.
        let fids: Vec<Option<f64>> = explanations.iter().map(|e| e.fidelity).collect();
        let gf = global_faithfulness(&fids).map_err(ctx)?;
        (Vec::new(), 0, gf.value, gf.undefined)
    } else {
        let agg = aggregate_events(&selected, &merge, explanations).map_err(ctx)?;
        let total: f64 = agg.clusters.iter().map(|c| importance[c.global_id]).sum();
        let clusters = agg
            .clusters
            .into_iter()
            .map(|c| SummaryCluster {
                global_id: c.global_id,
                kind: c.kind,
                normalised_importance: if total > 0.0 {
                    importance[c.global_id] / total
                } else {
                    0.0
                },
                global_importance: importance[c.global_id],
                event_count: c.events.len(),
                attributes: c.attributes,
                centroid: merge.globals[c.global_id].merged_centroid.clone(),
            })
            .collect();
        let fids: Vec<Option<f64>> = selected.rows.iter().map(|&r| explanations[r].fidelity).collect();
        let gf = global_faithfulness(&fids).map_err(ctx)?;
        (clusters, agg.omitted_empty, gf.value, gf.undefined)
    };

    Ok(GlobalSummary {
        class_label: locals.class,
        class_name,
        percentile: p,
        clusters,
        gf,
        undefined_fidelities: undefined,
        selected_instances: selected.instance_ids.clone(),
        selection_gains: selected.gains.clone(),
        shortfall: selected.shortfall,
        total_global_clusters: merge.len(),
        global_clusters_by_kind: PepKind::ALL.iter().map(|&k| (k, merge.count_by_kind(k))).collect(),
        covered_clusters: selected.coverage.iter().filter(|c| **c).count(),
        omitted_empty_clusters: omitted,
        config: PipelineConfig {
            jobs: None,
            ..cfg.clone()
        },
    })
}

/// All class summaries at one merge percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileRun {
    pub percentile: f64,
    pub summaries: Vec<GlobalSummary>,
    /// Mean of the per-class GF values.
    pub macro_gf: f64,
    pub total_global_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub locals: LocalBatch,
    pub runs: Vec<PercentileRun>,
}

impl PipelineReport {
    pub fn run(&self, p: f64) -> Option<&PercentileRun> {
        self.runs.iter().find(|r| r.percentile == p)
    }
}

pub fn synthesize(dataset: &Dataset, batch: &LocalBatch, p: f64, cfg: &PipelineConfig) -> Result<PercentileRun> {
    let summaries = batch
        .classes
        .iter()
        .map(|cl| synthesize_class(cl, dataset.label_names()[cl.class - 1], p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let macro_gf = summaries.iter().map(|s| s.gf).sum::<f64>() / summaries.len() as f64;
    let total_global_clusters = summaries.iter().map(|s| s.total_global_clusters).sum();
    Ok(PercentileRun {
        percentile: p,
        summaries,
        macro_gf,
        total_global_clusters,
    })
}

/// Local explanations once, then global synthesis at every configured
/// merge percentile.
pub fn run_pipeline<P: Predictor + ?Sized>(
    dataset: &Dataset,
    predictor: &P,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    let locals = explain_locals(dataset, predictor, cfg)?;
    let runs = cfg
        .percentiles
        .iter()
        .map(|&p| synthesize(dataset, &locals, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineReport { locals, runs })
}
