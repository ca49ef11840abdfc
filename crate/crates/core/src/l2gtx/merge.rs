//! Merging local clusters of the same kind across instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lomatce::cluster::column_scale;
use crate::lomatce::{LocalExplanation, PepKind};
use crate::numerics::linkage::{cut_at_distance, percentile};
use crate::numerics::{agglomerative, Linkage, MergeStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCluster {
    pub global_id: usize,
    pub kind: PepKind,
    /// `(instance_id, local cluster_id)` of every member.
    pub members: Vec<(usize, usize)>,
    /// Mean of the member centroids, raw units.
    pub merged_centroid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeOptions {
    pub linkage: Linkage,
    /// Use one cut height for all kinds, taken over the pooled merge
    /// distances, instead of one per kind.
    pub pooled_tau: bool,
}

impl Default for MergeOptions {
    fn default() -> Self {
        MergeOptions {
            linkage: Linkage::Average,
            pooled_tau: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeResult {
    pub globals: Vec<GlobalCluster>,
    /// `mapping[i][k]`: global id of retained cluster `k` of `locals[i]`.
    pub mapping: Vec<Vec<usize>>,
    /// Cut height per kind present (`None` for a single centroid).
    pub thresholds: Vec<(PepKind, Option<f64>)>,
}

impl MergeResult {
    pub fn len(&self) -> usize {
        self.globals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.globals.is_empty()
    }

    pub fn count_by_kind(&self, kind: PepKind) -> usize {
        self.globals.iter().filter(|g| g.kind == kind).count()
    }
}

struct KindDendrogram {
    kind: PepKind,
    /// `(local index, retained cluster position)` per leaf.
    leaves: Vec<(usize, usize)>,
    merges: Vec<MergeStep>,
}

/// Agglomerates retained local-cluster centroids per kind and cuts each
/// dendrogram at the `p`-th percentile of its merge distances.
///
/// Centroids are z-scored per kind over the pooled set before distances are
/// taken, so attributes with different units are commensurate.
pub fn merge_clusters(locals: &[LocalExplanation], p: f64, opts: &MergeOptions) -> Result<MergeResult> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Domain(format!("merge percentile {p} outside [0, 100]")));
    }
    let mut dendrograms = Vec::new();
    for kind in PepKind::ALL {
        let mut leaves = Vec::new();
        let mut raw = Vec::new();
        for (li, local) in locals.iter().enumerate() {
            for (ci, c) in local.clusters.iter().enumerate() {
                if c.kind == kind {
                    leaves.push((li, ci));
                    raw.push(c.centroid.clone());
                }
            }
        }
        if leaves.is_empty() {
            continue;
        }
        let (mean, std) = column_scale(&raw);
        let scaled: Vec<Vec<f64>> = raw
            .iter()
            .map(|r| {
                r.iter()
                    .zip(mean.iter().zip(&std))
                    .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
                    .collect()
            })
            .collect();
        let merges = agglomerative(&scaled, opts.linkage)?;
        dendrograms.push(KindDendrogram { kind, leaves, merges });
    }

    let pooled_tau = if opts.pooled_tau {
        let all: Vec<f64> = dendrograms
            .iter()
            .flat_map(|d| d.merges.iter().map(|m| m.distance))
            .collect();
        if all.is_empty() {
            None
        } else {
            Some(percentile(&all, p)?)
        }
    } else {
        None
    };

    let mut mapping: Vec<Vec<usize>> = locals.iter().map(|l| vec![usize::MAX; l.clusters.len()]).collect();
    let mut globals = Vec::new();
    let mut thresholds = Vec::new();
    for d in dendrograms {
        let tau = if d.merges.is_empty() {
            None
        } else if opts.pooled_tau {
            pooled_tau
        } else {
            let dist: Vec<f64> = d.merges.iter().map(|m| m.distance).collect();
            Some(percentile(&dist, p)?)
        };
        let labels = match tau {
            Some(t) => cut_at_distance(&d.merges, t)?,
            None => vec![0; d.leaves.len()],
        };
        thresholds.push((d.kind, tau));
        let base = globals.len();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let dims = d.kind.dims();
        let mut sums = vec![vec![0.0; dims]; count];
        for _ in 0..count {
            globals.push(GlobalCluster {
                global_id: globals.len(),
                kind: d.kind,
                members: Vec::new(),
                merged_centroid: Vec::new(),
            });
        }
        for (&(li, ci), &label) in d.leaves.iter().zip(&labels) {
            let g = &mut globals[base + label];
            let local = &locals[li];
            g.members.push((local.instance_id, local.clusters[ci].cluster_id));
            for (s, v) in sums[label].iter_mut().zip(&local.clusters[ci].centroid) {
                *s += v;
            }
            mapping[li][ci] = base + label;
        }
        for (label, s) in sums.into_iter().enumerate() {
            let g = &mut globals[base + label];
            let n = g.members.len() as f64;
            g.merged_centroid = s.into_iter().map(|v| v / n).collect();
        }
    }
    Ok(MergeResult {
        globals,
        mapping,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lomatce::LocalClusterInfo;

    fn local(id: usize, clusters: &[(PepKind, &[f64], f64)]) -> LocalExplanation {
        LocalExplanation {
            instance_id: id,
            predicted_class: 1,
            fidelity: Some(0.5),
            clusters: clusters
                .iter()
                .enumerate()
                .map(|(i, (kind, c, imp))| LocalClusterInfo {
                    cluster_id: i,
                    kind: *kind,
                    centroid: c.to_vec(),
                    importance: *imp,
                    events: Vec::new(),
                })
                .collect(),
            full_coefficients: Vec::new(),
            intercept: 0.0,
            rank_deficient: false,
        }
    }

    fn sample_locals() -> Vec<LocalExplanation> {
        (0..6)
            .map(|i| {
                let t = i as f64;
                local(
                    i,
                    &[
                        (PepKind::LocalMax, &[10.0 + t, 1.0 + 0.1 * t], 0.4),
                        (PepKind::Increasing, &[5.0 * t, 3.0 + t, 0.2], -0.3),
                    ],
                )
            })
            .collect()
    }

    #[test]
    fn full_percentile_gives_one_cluster_per_kind() {
        let m = merge_clusters(&sample_locals(), 100.0, &MergeOptions::default()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.count_by_kind(PepKind::LocalMax), 1);
        assert_eq!(m.count_by_kind(PepKind::Increasing), 1);
    }

    #[test]
    fn mapping_is_total_and_kind_preserving() {
        let locals = sample_locals();
        let m = merge_clusters(&locals, 25.0, &MergeOptions::default()).unwrap();
        for (l, map) in locals.iter().zip(&m.mapping) {
            for (c, &g) in l.clusters.iter().zip(map) {
                assert_eq!(m.globals[g].kind, c.kind);
            }
        }
    }

    #[test]
    fn zero_percentile_on_distinct_centroids_is_near_identity() {
        let locals: Vec<_> = (0..5)
            .map(|i| local(i, &[(PepKind::LocalMin, &[(i * i) as f64 * 3.0, 0.0], 1.0)]))
            .collect();
        let m = merge_clusters(&locals, 0.0, &MergeOptions::default()).unwrap();
        // Distances 3, 9, 15, 21 between neighbours: only the first merge applies.
        assert_eq!(m.len(), 4);
    }

    #[test]
    fn duplicated_blobs_at_median() {
        let mut locals = Vec::new();
        for i in 0..4 {
            locals.push(local(i, &[(PepKind::LocalMax, &[10.0, 1.0], 0.5)]));
            locals.push(local(10 + i, &[(PepKind::LocalMax, &[80.0, -2.0], 0.5)]));
        }
        let m = merge_clusters(&locals, 50.0, &MergeOptions::default()).unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn single_centroid_is_singleton() {
        let locals = vec![local(0, &[(PepKind::Decreasing, &[1.0, 2.0, -1.0], 0.1)])];
        let m = merge_clusters(&locals, 95.0, &MergeOptions::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.thresholds, vec![(PepKind::Decreasing, None)]);
    }
}
