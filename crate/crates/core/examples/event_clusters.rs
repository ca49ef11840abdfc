//! Extracts trends and extrema from a perturbation neighbourhood and
//! clusters them per kind, choosing k by silhouette.
//!
//! ```bash
//! cargo run --release --example event_clusters
//! ```

use l2gtx::io::standardize;
use l2gtx::lomatce::{build_event_matrix, cluster_events, extract_peps, perturb_neighbourhood, ClusterConfig, ParameterisedEvent, PepConfig};
use l2gtx::synthetic;

fn main() -> l2gtx::Result<()> {
    let data = standardize(&synthetic::ecg_like(0));
    let x = &data.instances()[0];

    let own = extract_peps(x.values(), &PepConfig::default());
    println!("instance 0 has {} events:", own.events.len());
    for e in &own.events {
        println!("  {:<10} {:?}", e.kind(), e.features());
    }

    let hood = perturb_neighbourhood(x, 150, 10, 7)?;
    let events: Vec<ParameterisedEvent> = hood
        .samples
        .iter()
        .enumerate()
        .flat_map(|(s, series)| {
            extract_peps(series.values(), &PepConfig::default())
                .events
                .into_iter()
                .map(move |pep| ParameterisedEvent { pep, source_sample: s })
        })
        .collect();
    let clustering = cluster_events(&events, &ClusterConfig::default(), 7)?;
    println!("\n{} events over {} samples", events.len(), hood.len());
    for k in &clustering.kinds {
        let scores: Vec<String> = k.silhouette_scores.iter().map(|(k, s)| format!("k={k}:{s:.2}")).collect();
        println!("{:<10} k={} sizes {:?}  [{}]", k.kind, k.k, k.sizes, scores.join(" "));
    }
    let z = build_event_matrix(hood.len(), &events, &clustering)?;
    println!("\ncounts of sample 0: {:?}", z[0]);
    Ok(())
}
