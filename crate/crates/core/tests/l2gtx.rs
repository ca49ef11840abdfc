mod common;

use l2gtx::io::standardize;
use l2gtx::l2gtx::{
    build_matrix, explain_locals, global_faithfulness, global_importance, merge_clusters, run_pipeline,
    select_instances, synthesize, MergeOptions, PipelineConfig,
};
use l2gtx::l2gtx::aggregate_events;
use l2gtx::lomatce::LomatceConfig;
use l2gtx::predictor::fit_calibrated_centroid;
use l2gtx::{oracle, synthetic, GlobalSummary};

fn small_cfg(seed: u64) -> PipelineConfig {
    PipelineConfig {
        n_inst: 8,
        budget: 8,
        percentiles: vec![25.0, 50.0, 75.0, 95.0],
        seed,
        lomatce: LomatceConfig {
            n_samples: 60,
            ..LomatceConfig::default()
        },
        ..PipelineConfig::default()
    }
}

#[test]
fn aggregation_and_selection_match_oracles_on_real_locals() {
    let d = standardize(&synthetic::ecg_like(0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let cfg = small_cfg(2);
    let batch = explain_locals(&d, &m, &cfg).unwrap();
    for class in &batch.classes {
        for p in [25.0, 50.0, 95.0] {
            let merge = merge_clusters(&class.explanations, p, &MergeOptions::default()).unwrap();
            let mat = build_matrix(&class.explanations, &merge).unwrap();
            let imp = global_importance(&mat);
            assert_eq!(imp, oracle::importance_direct(&mat.values, mat.cluster_count));
            let sel = select_instances(&mat, &imp, cfg.budget, cfg.epsilon).unwrap();
            assert_eq!(sel.rows, oracle::greedy_brute_force(&mat.values, &imp, cfg.budget, cfg.epsilon));
            let agg = aggregate_events(&sel, &merge, &class.explanations).unwrap();
            let want = oracle::aggregate_direct(&sel, &merge, &class.explanations);
            assert_eq!(agg.clusters.len(), want.len());
            for (c, (g, stats)) in agg.clusters.iter().zip(&want) {
                assert_eq!(c.global_id, *g);
                for (a, (mean, std)) in c.attributes.iter().zip(stats) {
                    assert!((a.mean - mean).abs() <= 1e-12 && (a.std - std).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn summaries_are_normalised_and_gf_is_the_mean_of_picks() {
    let d = standardize(&synthetic::ecg_like(0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let report = run_pipeline(&d, &m, &small_cfg(5)).unwrap();
    for run in &report.runs {
        for s in &run.summaries {
            let total: f64 = s.clusters.iter().map(|c| c.normalised_importance).sum();
            assert!(s.clusters.is_empty() || (total - 1.0).abs() <= 1e-9);
            let locals = &report.locals.classes[s.class_label - 1].explanations;
            let fids: Vec<Option<f64>> = s
                .selected_instances
                .iter()
                .map(|id| locals.iter().find(|l| l.instance_id == *id).unwrap().fidelity)
                .collect();
            assert_eq!(s.gf, global_faithfulness(&fids).unwrap().value);
            assert!(s.selected_instances.len() + s.shortfall == 8);
        }
        let mean = run.summaries.iter().map(|s| s.gf).sum::<f64>() / run.summaries.len() as f64;
        assert_eq!(run.macro_gf, mean);
    }
    let counts: Vec<usize> = report.runs.iter().map(|r| r.total_global_clusters).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}

#[test]
fn worker_count_does_not_change_results() {
    let d = standardize(&synthetic::two_sines(10, 40, 0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let one = run_pipeline(&d, &m, &PipelineConfig { jobs: Some(1), ..small_cfg(1) }).unwrap();
    let four = run_pipeline(&d, &m, &PipelineConfig { jobs: Some(4), ..small_cfg(1) }).unwrap();
    assert_eq!(one.runs, four.runs);
}

#[test]
fn synthesis_reuses_locals_across_percentiles() {
    let d = standardize(&synthetic::ecg_like(1));
    let m = fit_calibrated_centroid(&d).unwrap();
    let cfg = small_cfg(3);
    let report = run_pipeline(&d, &m, &cfg).unwrap();
    let again = synthesize(&d, &report.locals, 50.0, &cfg).unwrap();
    assert_eq!(&again, report.run(50.0).unwrap());
}

#[test]
fn summary_json_round_trips() {
    let d = standardize(&synthetic::two_sines(10, 40, 0));
    let m = fit_calibrated_centroid(&d).unwrap();
    let report = run_pipeline(&d, &m, &small_cfg(0)).unwrap();
    let s = &report.runs[0].summaries[0];
    let back: GlobalSummary = serde_json::from_str(&serde_json::to_string(s).unwrap()).unwrap();
    assert_eq!(&back, s);
}

#[test]
fn too_few_instances_is_reported() {
    let d = synthetic::two_sines(5, 20, 0);
    let m = fit_calibrated_centroid(&d).unwrap();
    let e = run_pipeline(&d, &m, &small_cfg(0)).unwrap_err();
    assert!(matches!(e, l2gtx::Error::InsufficientInstances { requested: 8, available: 5, .. }), "{e}");
}
