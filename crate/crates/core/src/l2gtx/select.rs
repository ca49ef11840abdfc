//! Instance-cluster importance matrix, global importance and greedy
//! budgeted instance selection.

use serde::{Deserialize, Serialize};

use super::merge::MergeResult;
use crate::error::{Error, Result};
use crate::lomatce::LocalExplanation;

/// Default membership tolerance for `|M[i][j]|`.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceClusterMatrix {
    /// `values[i][j]`: summed signed importance of instance `i`'s local
    /// clusters mapped to global cluster `j`.
    pub values: Vec<Vec<f64>>,
    pub instance_ids: Vec<usize>,
    pub cluster_count: usize,
}

impl InstanceClusterMatrix {
    pub fn rows(&self) -> usize {
        self.values.len()
    }
}

pub fn build_matrix(locals: &[LocalExplanation], merge: &MergeResult) -> Result<InstanceClusterMatrix> {
    if merge.mapping.len() != locals.len() {
        return Err(Error::Shape("merge mapping does not match the local explanations".into()));
    }
    let g = merge.len();
    let mut values = vec![vec![0.0; g]; locals.len()];
    for (i, (local, map)) in locals.iter().zip(&merge.mapping).enumerate() {
        if map.len() != local.clusters.len() {
            return Err(Error::Shape(format!("instance {} is only partly mapped", local.instance_id)));
        }
        for (c, &j) in local.clusters.iter().zip(map) {
            if j >= g {
                return Err(Error::Shape(format!(
                    "local cluster {} of instance {} has no global cluster",
                    c.cluster_id, local.instance_id
                )));
            }
            values[i][j] += c.importance;
        }
    }
    Ok(InstanceClusterMatrix {
        values,
        instance_ids: locals.iter().map(|l| l.instance_id).collect(),
        cluster_count: g,
    })
}

/// `I_j = sqrt(Σ_i |M[i][j]|)`.
pub fn global_importance(m: &InstanceClusterMatrix) -> Vec<f64> {
    (0..m.cluster_count)
        .map(|j| m.values.iter().map(|row| row[j].abs()).sum::<f64>().sqrt())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSet {
    /// Matrix rows in selection order.
    pub rows: Vec<usize>,
    /// Instance ids in selection order.
    pub instance_ids: Vec<usize>,
    pub coverage: Vec<bool>,
    /// Marginal gain of every pick.
    pub gains: Vec<f64>,
    /// Budget slots left unused because no instance added coverage.
    pub shortfall: usize,
    /// The budget exceeded the number of instances and was reduced.
    pub budget_clamped: bool,
}

impl SelectedSet {
    pub fn covered_weight(&self, importance: &[f64]) -> f64 {
        self.coverage
            .iter()
            .zip(importance)
            .filter(|(c, _)| **c)
            .map(|(_, i)| i)
            .sum()
    }
}

/// Marginal coverage gain of adding row `i`.
pub fn marginal_gain(m: &InstanceClusterMatrix, importance: &[f64], coverage: &[bool], i: usize, epsilon: f64) -> f64 {
    let mut gain = 0.0;
    for j in 0..m.cluster_count {
        if !coverage[j] && m.values[i][j].abs() > epsilon {
            gain += importance[j];
        }
    }
    gain
}

/// Greedy selection of at most `budget` rows maximising importance-weighted
/// coverage. Ties go to the lowest row; selection stops early once no row
/// adds coverage.
pub fn select_instances(
    m: &InstanceClusterMatrix,
    importance: &[f64],
    budget: usize,
    epsilon: f64,
) -> Result<SelectedSet> {
    if budget == 0 {
        return Err(Error::Domain("budget must be at least 1".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must be >= 0")));
    }
    if importance.len() != m.cluster_count {
        return Err(Error::Shape("importance vector does not match the matrix".into()));
    }
    let n = m.rows();
    let budget_clamped = budget > n;
    let budget = budget.min(n);
    let mut coverage = vec![false; m.cluster_count];
    let mut chosen = vec![false; n];
    let mut rows = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);
    while rows.len() < budget {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !chosen[i]) {
            let g = marginal_gain(m, importance, &coverage, i, epsilon);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        let Some((i, g)) = best else { break };
        if g <= 0.0 {
            break;
        }
        chosen[i] = true;
        for j in 0..m.cluster_count {
            if m.values[i][j].abs() > epsilon {
                coverage[j] = true;
            }
        }
        rows.push(i);
        gains.push(g);
    }
    Ok(SelectedSet {
        instance_ids: rows.iter().map(|&r| m.instance_ids[r]).collect(),
        shortfall: budget - rows.len(),
        rows,
        coverage,
        gains,
        budget_clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(values: Vec<Vec<f64>>) -> InstanceClusterMatrix {
        let cluster_count = values[0].len();
        InstanceClusterMatrix {
            instance_ids: (0..values.len()).collect(),
            values,
            cluster_count,
        }
    }

    #[test]
    fn importance_is_sqrt_of_abs_column_sum() {
        let m = matrix(vec![vec![4.0, 1.0], vec![0.0, -3.0]]);
        assert_eq!(global_importance(&m), vec![2.0, 2.0]);
        let id = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(global_importance(&id), vec![1.0, 1.0]);
    }

    #[test]
    fn forced_argmax_with_budget_one() {
        // A covers cluster 1, B covers 2, C covers both.
        let m = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let s = select_instances(&m, &[3.0, 1.0], 1, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.rows, vec![2]);
        assert_eq!(s.gains, vec![4.0]);
    }

    #[test]
    fn saturation_stops_early_with_shortfall() {
        let m = matrix(vec![vec![1.0, 0.0, 0.0], vec![0.0, -2.0, 0.0], vec![0.5, 0.0, 0.0]]);
        let s = select_instances(&m, &global_importance(&m), 3, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.coverage, vec![true, true, false]);
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.shortfall, 1);
    }

    #[test]
    fn oversized_budget_is_clamped() {
        let m = matrix(vec![vec![1.0], vec![1.0]]);
        let s = select_instances(&m, &[1.0], 5, DEFAULT_EPSILON).unwrap();
        assert!(s.budget_clamped);
        assert_eq!(s.rows, vec![0]);
    }

    #[test]
    fn negative_importance_counts_as_membership() {
        let m = matrix(vec![vec![0.0, -0.4], vec![0.0, 0.0]]);
        let s = select_instances(&m, &[1.0, 1.0], 1, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.coverage, vec![false, true]);
    }

    #[test]
    fn matrix_sums_importances_per_global_cluster() {
        use crate::l2gtx::merge::{GlobalCluster, MergeResult};
        use crate::lomatce::{LocalClusterInfo, PepKind};
        let mk = |id, imp| LocalClusterInfo {
            cluster_id: id,
            kind: PepKind::LocalMax,
            centroid: vec![0.0, 0.0],
            importance: imp,
            events: vec![],
        };
        let locals = vec![
            LocalExplanation {
                instance_id: 7,
                predicted_class: 1,
                fidelity: None,
                clusters: vec![mk(0, 0.3), mk(1, 0.4)],
                full_coefficients: vec![],
                intercept: 0.0,
                rank_deficient: false,
            },
            LocalExplanation {
                instance_id: 9,
                predicted_class: 1,
                fidelity: None,
                clusters: vec![],
                full_coefficients: vec![],
                intercept: 0.0,
                rank_deficient: false,
            },
        ];
        let merge = MergeResult {
            globals: vec![
                GlobalCluster {
                    global_id: 0,
                    kind: PepKind::LocalMax,
                    members: vec![(7, 0), (7, 1)],
                    merged_centroid: vec![0.0, 0.0],
                },
                GlobalCluster {
                    global_id: 1,
                    kind: PepKind::LocalMax,
                    members: vec![],
                    merged_centroid: vec![0.0, 0.0],
                },
            ],
            mapping: vec![vec![0, 0], vec![]],
            thresholds: vec![],
        };
        let m = build_matrix(&locals, &merge).unwrap();
        assert!((m.values[0][0] - 0.7).abs() < 1e-15);
        assert_eq!(m.values[0][1], 0.0);
        assert_eq!(m.values[1], vec![0.0, 0.0]);
    }
}
