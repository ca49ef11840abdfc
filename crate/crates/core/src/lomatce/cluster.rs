//! Per-kind clustering of the pooled neighbourhood events and the
//! sample-by-cluster count matrix.

use serde::{Deserialize, Serialize};

use super::events::{ParameterisedEvent, PepKind};
use crate::error::{Error, Result};
use crate::numerics::{kmeans, silhouette_select_k};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub max_iter: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            k_min: 2,
            k_max: 6,
            max_iter: 100,
        }
    }
}

/// Clustering of the events of a single kind.
#[derive(Debug, Clone, PartialEq)]
pub struct KindClustering {
    pub kind: PepKind,
    /// First design-matrix column of this kind.
    pub column_offset: usize,
    pub k: usize,
    /// Too few or indistinguishable events; everything went into one cluster.
    pub degenerate: bool,
    /// Per-dimension mean and standard deviation used for z-scoring.
    pub scale_mean: Vec<f64>,
    pub scale_std: Vec<f64>,
    /// Cluster means in raw event-parameter units.
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub silhouette_scores: Vec<(usize, f64)>,
}

impl KindClustering {
    pub fn scaled(&self, features: &[f64]) -> Vec<f64> {
        zscore(features, &self.scale_mean, &self.scale_std)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventClustering {
    /// Kinds that have events, in [`PepKind::ALL`] order.
    pub kinds: Vec<KindClustering>,
    /// Design-matrix column of every pooled event.
    pub event_column: Vec<usize>,
    pub total_clusters: usize,
}

impl EventClustering {
    /// The kind and within-kind cluster index behind a design column.
    pub fn column(&self, col: usize) -> Option<(&KindClustering, usize)> {
        self.kinds
            .iter()
            .find(|k| col >= k.column_offset && col < k.column_offset + k.k)
            .map(|k| (k, col - k.column_offset))
    }
}

fn zscore(x: &[f64], mean: &[f64], std: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(mean.iter().zip(std))
        .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
        .collect()
}

/// Population mean and standard deviation of each column.
pub(crate) fn column_scale(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    (mean, std)
}

/// Clusters each kind independently on z-scored parameters, picking k by
/// silhouette. Kinds with fewer than `k_min + 1` events, or whose events are
/// indistinguishable, form a single cluster.
pub fn cluster_events(events: &[ParameterisedEvent], cfg: &ClusterConfig, seed: u64) -> Result<EventClustering> {
    if events.is_empty() {
        return Err(Error::Domain("no events to cluster".into()));
    }
    let mut kinds = Vec::new();
    let mut event_column = vec![usize::MAX; events.len()];
    let mut offset = 0;
    for kind in PepKind::ALL {
        let idx: Vec<usize> = (0..events.len()).filter(|&i| events[i].kind() == kind).collect();
        if idx.is_empty() {
            continue;
        }
        let raw: Vec<Vec<f64>> = idx.iter().map(|&i| events[i].pep.features()).collect();
        let (scale_mean, scale_std) = column_scale(&raw);
        let scaled: Vec<Vec<f64>> = raw.iter().map(|r| zscore(r, &scale_mean, &scale_std)).collect();
        let kind_seed = rng::derive(seed, kind as u64);

        let (k, degenerate, scores, assignments) = if scaled.len() < cfg.k_min + 1 {
            (1, true, Vec::new(), vec![0; scaled.len()])
        } else {
            let sel = silhouette_select_k(&scaled, cfg.k_min, cfg.k_max, kind_seed)?;
            if sel.degenerate {
                (1, true, sel.scores, vec![0; scaled.len()])
            } else {
                let fit = kmeans(&scaled, sel.k, rng::derive(kind_seed, 1), cfg.max_iter)?;
                (sel.k, false, sel.scores, fit.assignments)
            }
        };

        let dim = kind.dims();
        let mut centroids = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (r, &a) in raw.iter().zip(&assignments) {
            sizes[a] += 1;
            for (c, v) in centroids[a].iter_mut().zip(r) {
                *c += v;
            }
        }
        for (c, &s) in centroids.iter_mut().zip(&sizes) {
            if s > 0 {
                c.iter_mut().for_each(|v| *v /= s as f64);
            }
        }
        for (&i, &a) in idx.iter().zip(&assignments) {
            event_column[i] = offset + a;
        }
        kinds.push(KindClustering {
            kind,
            column_offset: offset,
            k,
            degenerate,
            scale_mean,
            scale_std,
            centroids,
            sizes,
            silhouette_scores: scores,
        });
        offset += k;
    }
    Ok(EventClustering {
        kinds,
        event_column,
        total_clusters: offset,
    })
}

/// `Z[s][j]` = number of events of sample `s` in cluster column `j`.
pub fn build_event_matrix(
    n_samples: usize,
    events: &[ParameterisedEvent],
    clustering: &EventClustering,
) -> Result<Vec<Vec<f64>>> {
    if clustering.event_column.len() != events.len() {
        return Err(Error::Shape("clustering does not cover the event list".into()));
    }
    let mut z = vec![vec![0.0; clustering.total_clusters]; n_samples];
    for (ev, &col) in events.iter().zip(&clustering.event_column) {
        if ev.source_sample >= n_samples || col >= clustering.total_clusters {
            return Err(Error::Shape(format!("event {ev:?} maps outside the matrix")));
        }
        z[ev.source_sample][col] += 1.0;
    }
    Ok(z)
}
