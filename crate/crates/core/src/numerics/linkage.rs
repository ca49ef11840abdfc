//! Agglomerative clustering over Euclidean distances and percentile cuts of
//! the resulting dendrogram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::Config(format!("unknown linkage {other:?}"))),
        }
    }
}

/// One agglomeration. Leaves are `0..n`; the i-th merge creates id `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub new_id: usize,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Builds the full dendrogram (`n - 1` merges) with Lance-Williams updates.
/// Ties on distance go to the pair with the smallest cluster ids.
pub fn agglomerative(points: &[Vec<f64>], linkage: Linkage) -> Result<Vec<MergeStep>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Domain("agglomerative clustering of no points".into()));
    }
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclid(&points[i], &points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    // slot -> (cluster id, size); slots are reused for merged clusters.
    let mut active: Vec<Option<(usize, usize)>> = (0..n).map(|i| Some((i, 1))).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, (usize, usize))> = None;
        for a in 0..n {
            let Some((ida, _)) = active[a] else { continue };
            for b in a + 1..n {
                let Some((idb, _)) = active[b] else { continue };
                let key = (ida.min(idb), ida.max(idb));
                let d = dist[a][b];
                let better = match best {
                    None => true,
                    Some((bd, _, _, bkey)) => d < bd || (d == bd && key < bkey),
                };
                if better {
                    best = Some((d, a, b, key));
                }
            }
        }
        let (d, a, b, (left, right)) = best.expect("at least two active clusters");
        let (_, na) = active[a].unwrap();
        let (_, nb) = active[b].unwrap();
        for c in 0..n {
            if c == a || c == b || active[c].is_none() {
                continue;
            }
            let updated = match linkage {
                Linkage::Single => dist[a][c].min(dist[b][c]),
                Linkage::Complete => dist[a][c].max(dist[b][c]),
                Linkage::Average => {
                    (na as f64 * dist[a][c] + nb as f64 * dist[b][c]) / (na + nb) as f64
                }
            };
            dist[a][c] = updated;
            dist[c][a] = updated;
        }
        let new_id = n + step;
        active[a] = Some((new_id, na + nb));
        active[b] = None;
        merges.push(MergeStep {
            left,
            right,
            distance: d,
            new_id,
        });
    }
    Ok(merges)
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("percentile of no values".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Domain(format!("percentile {p} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Result of cutting a dendrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub threshold: Option<f64>,
    /// Cluster per leaf, contiguous from 0 in order of first appearance.
    pub labels: Vec<usize>,
    pub cluster_count: usize,
}

/// Cuts at `τ = percentile_p(merge distances)`, applying every merge with
/// distance `≤ τ`. The number of leaves is `merges.len() + 1`.
pub fn cut_at_percentile(merges: &[MergeStep], p: f64) -> Result<Cut> {
    let n = merges.len() + 1;
    if merges.is_empty() {
        if !(0.0..=100.0).contains(&p) {
            return Err(Error::Domain(format!("percentile {p} outside [0, 100]")));
        }
        return Ok(Cut {
            threshold: None,
            labels: vec![0],
            cluster_count: 1,
        });
    }
    let distances: Vec<f64> = merges.iter().map(|m| m.distance).collect();
    let tau = percentile(&distances, p)?;
    cut_at_distance(merges, tau).map(|labels| {
        let cluster_count = labels.iter().max().map_or(0, |m| m + 1);
        debug_assert_eq!(labels.len(), n);
        Cut {
            threshold: Some(tau),
            labels,
            cluster_count,
        }
    })
}

/// Applies every merge with distance `≤ tau` and labels the leaves.
pub fn cut_at_distance(merges: &[MergeStep], tau: f64) -> Result<Vec<usize>> {
    let n = merges.len() + 1;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Any leaf of a cluster id stands in for the whole cluster.
    let mut representative: Vec<usize> = (0..n).collect();
    for m in merges {
        if m.left >= representative.len() || m.right >= representative.len() {
            return Err(Error::Domain(format!("merge {m:?} references an unknown cluster")));
        }
        let (ra, rb) = (representative[m.left], representative[m.right]);
        representative.push(ra);
        if m.distance <= tau {
            let (a, b) = (find(&mut parent, ra), find(&mut parent, rb));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut by_root = vec![usize::MAX; n];
    for (leaf, label) in labels.iter_mut().enumerate() {
        let root = find(&mut parent, leaf);
        if by_root[root] == usize::MAX {
            by_root[root] = next;
            next += 1;
        }
        *label = by_root[root];
    }
    Ok(labels)
}
