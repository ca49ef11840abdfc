//! Global explanations of a nearest-centroid classifier on ECG-like beats,
//! swept over merge percentiles.
//!
//! ```bash
//! cargo run --release --example global_pipeline [-- path/to/ECG200_TRAIN.tsv]
//! ```

use std::time::Instant;

use l2gtx::io::{load_ucr_tsv, standardize};
use l2gtx::l2gtx::run_pipeline;
use l2gtx::predictor::fit_calibrated_centroid;
use l2gtx::{synthetic, PipelineConfig};

fn main() -> l2gtx::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(path) => load_ucr_tsv(path)?,
        None => synthetic::ecg_like(0),
    };
    let data = standardize(&data);
    let model = fit_calibrated_centroid(&data)?;

    let cfg = PipelineConfig {
        percentiles: vec![25.0, 50.0, 75.0, 95.0],
        seed: 1,
        ..PipelineConfig::default()
    };
    let t = Instant::now();
    let report = run_pipeline(&data, &model, &cfg)?;
    println!("{}: {} instances explained in {:.1?}", data.name, report.locals.sample.total(), t.elapsed());

    for run in &report.runs {
        println!("\np = {}: macro GF {:.3}, {} global clusters", run.percentile, run.macro_gf, run.total_global_clusters);
        for s in &run.summaries {
            println!("  class {} (GF {:.3}, {} picked)", s.class_name, s.gf, s.selected_instances.len());
            let mut clusters: Vec<_> = s.clusters.iter().collect();
            clusters.sort_by(|a, b| b.normalised_importance.total_cmp(&a.normalised_importance));
            for c in clusters.into_iter().take(4) {
                let attrs: Vec<String> = c
                    .attributes
                    .iter()
                    .map(|a| format!("{} {:.1}±{:.1}", a.name, a.mean, a.std))
                    .collect();
                println!("    {:<10} {:>5.1}%  {}", c.kind, 100.0 * c.normalised_importance, attrs.join(", "));
            }
        }
    }
    Ok(())
}
