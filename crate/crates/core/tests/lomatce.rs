mod common;

use l2gtx::io::standardize;
use l2gtx::lomatce::{explain_instance, explain_instance_traced, LomatceConfig, PepKind};
use l2gtx::predictor::{fit_calibrated_centroid, ConstantPredictor};
use l2gtx::synthetic;

fn cfg() -> LomatceConfig {
    LomatceConfig {
        n_samples: 80,
        ..LomatceConfig::default()
    }
}

#[test]
fn explanations_are_deterministic_per_seed() {
    let d = standardize(&synthetic::ecg_like(0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let x = &d.instances()[5];
    let a = explain_instance(x, 5, &m, &cfg(), 11).unwrap();
    assert_eq!(a, explain_instance(x, 5, &m, &cfg(), 11).unwrap());
    assert_ne!(a, explain_instance(x, 5, &m, &cfg(), 12).unwrap());
}

#[test]
fn trace_is_consistent() {
    let d = standardize(&synthetic::ecg_like(0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let (e, t) = explain_instance_traced(&d.instances()[3], 3, &m, &cfg(), 4).unwrap();
    assert_eq!(t.neighbourhood.samples[0], d.instances()[3]);
    assert_eq!(t.weights[0], 1.0);
    assert!(t.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
    let clustering = t.clustering.as_ref().unwrap();
    assert_eq!(t.design.len(), 80);
    assert!(t.design.iter().all(|r| r.len() == clustering.total_clusters));
    // Every event lands in exactly one column of its own sample's row.
    let total: f64 = t.design.iter().flatten().sum();
    assert_eq!(total as usize, t.events.len());

    assert!(e.clusters.len() <= 5);
    for w in e.clusters.windows(2) {
        assert!(w[0].importance.abs() >= w[1].importance.abs());
    }
    for c in &e.clusters {
        assert_eq!(c.importance, e.full_coefficients[c.cluster_id]);
        assert_eq!(c.centroid.len(), c.kind.dims());
        assert!(c.events.iter().all(|ev| ev.kind() == c.kind));
    }
    let f = e.fidelity.unwrap();
    assert!(f <= 1.0);
}

#[test]
fn trace_up_to_clustering_ignores_the_predictor() {
    let d = standardize(&synthetic::ecg_like(0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let x = &d.instances()[9];
    let (_, a) = explain_instance_traced(x, 9, &m, &cfg(), 2).unwrap();
    let (_, b) = explain_instance_traced(x, 9, &ConstantPredictor::uniform(2), &cfg(), 2).unwrap();
    assert_eq!(a.neighbourhood, b.neighbourhood);
    assert_eq!(a.design, b.design);
    assert_eq!(a.weights, b.weights);
}

#[test]
fn constant_black_box_has_undefined_fidelity() {
    let d = standardize(&synthetic::ecg_like(0));
    let e = explain_instance(&d.instances()[0], 0, &ConstantPredictor::uniform(2), &cfg(), 1).unwrap();
    assert_eq!(e.fidelity, None);
    assert!(e.full_coefficients.iter().all(|b| b.abs() < 1e-12));
}

#[test]
fn planted_cluster_is_recovered() {
    let d = standardize(&synthetic::ecg_like(0));
    let mut hits = 0;
    for t in 0..6 {
        let r = common::planted_trial(&d.instances()[t * 11], &cfg(), t as u64).expect("plantable");
        hits += r.recovered() as usize;
    }
    assert!(hits >= 5, "{hits}/6");
}

#[test]
fn events_cover_all_kinds_on_a_heartbeat() {
    let d = standardize(&synthetic::ecg_like(0));
    let (_, t) = explain_instance_traced(&d.instances()[0], 0, &ConstantPredictor::uniform(2), &cfg(), 0).unwrap();
    for kind in PepKind::ALL {
        assert!(t.events.iter().any(|e| e.kind() == kind), "no {kind} events");
    }
}
