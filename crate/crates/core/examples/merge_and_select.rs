//! The global steps by hand for one class: merge the local clusters at a
//! percentile cut, weigh the merged clusters and pick representative
//! instances greedily.
//!
//! ```bash
//! cargo run --release --example merge_and_select [-- PERCENTILE]
//! ```

use l2gtx::io::standardize;
use l2gtx::l2gtx::{build_matrix, explain_locals, global_importance, merge_clusters, select_instances, MergeOptions};
use l2gtx::predictor::fit_calibrated_centroid;
use l2gtx::{synthetic, PipelineConfig};

fn main() -> l2gtx::Result<()> {
    let p: f64 = std::env::args().nth(1).map_or(75.0, |s| s.parse().expect("percentile"));
    let data = standardize(&synthetic::ecg_like(0));
    let model = fit_calibrated_centroid(&data)?;
    let cfg = PipelineConfig::default();
    let batch = explain_locals(&data, &model, &cfg)?;
    let locals = &batch.classes[0].explanations;

    let merge = merge_clusters(locals, p, &MergeOptions::default())?;
    println!("class {}: {} local clusters -> {} global at p = {p}", data.label_names()[0], locals.iter().map(|l| l.clusters.len()).sum::<usize>(), merge.len());
    for (kind, tau) in &merge.thresholds {
        println!("  cut for {kind:<10} {tau:?}");
    }

    let m = build_matrix(locals, &merge)?;
    let importance = global_importance(&m);
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]));
    for &g in order.iter().take(5) {
        let gc = &merge.globals[g];
        println!("  global {g:>2} {:<10} I = {:.3}  {} members", gc.kind, importance[g], gc.members.len());
    }

    let sel = select_instances(&m, &importance, cfg.budget, cfg.epsilon)?;
    println!("picked {:?} with gains {:.3?}", sel.instance_ids, sel.gains);
    println!("coverage {}/{}, {} budget slots unused", sel.coverage.iter().filter(|c| **c).count(), sel.coverage.len(), sel.shortfall);
    Ok(())
}
