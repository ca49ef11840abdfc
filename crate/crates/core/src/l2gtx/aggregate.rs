//! Flattening the selected instances' events into their global clusters and
//! summarising attributes; global faithfulness.

use serde::{Deserialize, Serialize};

use super::merge::MergeResult;
use super::select::SelectedSet;
use crate::error::{Error, Result};
use crate::lomatce::{LocalExplanation, Pep, PepKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub name: String,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEvents {
    pub global_id: usize,
    pub kind: PepKind,
    pub events: Vec<Pep>,
    pub attributes: Vec<AttributeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    /// Covered clusters with at least one event, by global id.
    pub clusters: Vec<ClusterEvents>,
    /// Covered clusters whose event set was empty.
    pub omitted_empty: usize,
}

/// Mean and population standard deviation (Welford's single pass).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    (mean, (m2 / values.len() as f64).sqrt())
}

/// Statistics of `attrs` over `events`.
pub fn attribute_stats(events: &[Pep], attrs: &[&str]) -> Vec<AttributeStats> {
    attrs
        .iter()
        .map(|&name| {
            let values: Vec<f64> = events.iter().filter_map(|e| e.attribute(name)).collect();
            let (mean, std) = mean_std(&values);
            AttributeStats {
                name: name.to_owned(),
                mean,
                std,
            }
        })
        .collect()
}

/// Pools the original-instance events of every selected instance's local
/// clusters into the covered global cluster they map to.
///
/// `locals[r]` must be the explanation behind matrix row `r`.
pub fn aggregate_events(
    selected: &SelectedSet,
    merge: &MergeResult,
    locals: &[LocalExplanation],
) -> Result<Aggregation> {
    if selected.rows.is_empty() {
        return Err(Error::Domain("no instances selected".into()));
    }
    let mut pooled: Vec<Vec<Pep>> = vec![Vec::new(); merge.len()];
    for &r in &selected.rows {
        let local = locals
            .get(r)
            .ok_or_else(|| Error::Shape(format!("selected row {r} has no local explanation")))?;
        for (c, &g) in local.clusters.iter().zip(&merge.mapping[r]) {
            if selected.coverage[g] {
                pooled[g].extend_from_slice(&c.events);
            }
        }
    }
    let mut clusters = Vec::new();
    let mut omitted_empty = 0;
    for (g, events) in pooled.into_iter().enumerate() {
        if !selected.coverage[g] {
            continue;
        }
        if events.is_empty() {
            omitted_empty += 1;
            continue;
        }
        let kind = merge.globals[g].kind;
        clusters.push(ClusterEvents {
            global_id: g,
            kind,
            attributes: attribute_stats(&events, &kind.summary_attributes()),
            events,
        });
    }
    Ok(Aggregation {
        clusters,
        omitted_empty,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Faithfulness {
    pub value: f64,
    /// Selected instances whose fidelity was undefined and scored 0.
    pub undefined: usize,
}

/// Mean surrogate fidelity over the selected instances.
pub fn global_faithfulness(fidelities: &[Option<f64>]) -> Result<Faithfulness> {
    if fidelities.is_empty() {
        return Err(Error::Domain("global faithfulness of an empty selection".into()));
    }
    // Sorting makes the floating-point sum independent of selection order.
    let mut values: Vec<f64> = fidelities.iter().map(|f| f.unwrap_or(0.0)).collect();
    values.sort_by(f64::total_cmp);
    Ok(Faithfulness {
        value: values.iter().sum::<f64>() / values.len() as f64,
        undefined: fidelities.iter().filter(|f| f.is_none()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_event_has_zero_spread() {
        let s = attribute_stats(&[Pep::LocalMax { time: 12, value: 0.4 }], &["time", "value"]);
        assert_eq!((s[0].mean, s[0].std), (12.0, 0.0));
        assert_eq!((s[1].mean, s[1].std), (0.4, 0.0));
    }

    #[test]
    fn two_maxima_by_hand() {
        let ev = [Pep::LocalMax { time: 10, value: 1.0 }, Pep::LocalMax { time: 20, value: 1.0 }];
        let s = attribute_stats(&ev, &["time"]);
        assert_eq!((s[0].mean, s[0].std), (15.0, 5.0));
    }

    #[test]
    fn gf_means_and_counts_undefined() {
        let g = global_faithfulness(&[Some(0.5), Some(0.7)]).unwrap();
        assert!((g.value - 0.6).abs() < 1e-15);
        let g = global_faithfulness(&[Some(0.8), None]).unwrap();
        assert_eq!((g.value, g.undefined), (0.4, 1));
        assert!(global_faithfulness(&[]).is_err());
    }

    #[test]
    fn gf_order_invariant() {
        let a = [Some(0.1), Some(0.72), Some(0.33), None, Some(0.9)];
        let mut b = a;
        b.reverse();
        assert_eq!(global_faithfulness(&a).unwrap(), global_faithfulness(&b).unwrap());
    }
}
