mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{adapter_command, write_dataset};
use l2gtx::synthetic;

fn l2gtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2gtx"))
        .args(args)
        .env_remove("L2GTX_SEED")
        .output()
        .unwrap()
}

fn quick(data: &Path, out: &Path) -> Vec<String> {
    [
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--n-inst",
        "4",
        "--budget",
        "4",
        "--samples",
        "40",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run(cmd: &str, extra: &[String], more: &[&str]) -> Output {
    let mut args = vec![cmd];
    args.extend(extra.iter().map(String::as_str));
    args.extend_from_slice(more);
    l2gtx(&args)
}

#[test]
fn explain_global_writes_the_artifact_tree() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(&synthetic::ecg_like(0), dir.path(), "Beats");
    let out = dir.path().join("out");
    let o = run("explain-global", &quick(&data, &out), &["--percentiles", "50,95", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let root = out.join("Beats/4");
    for f in [
        "metrics.json",
        "plot_50.csv",
        "plot_95.csv",
        "config.txt",
        "class_-1/summary_p50.json",
        "class_1/summary_p95.json",
    ] {
        assert!(root.join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(root.join("plot_95.csv")).unwrap();
    assert!(csv.starts_with("class,global_id,pep_kind,normalised_importance,attr,mean,std,count\n"));
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(root.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["runs"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("macro_gf="));
}

#[test]
fn missing_dataset_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run("explain-global", &quick(&dir.path().join("nope_TRAIN.tsv"), &out), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn bad_settings_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(&synthetic::ecg_like(0), dir.path(), "Beats");
    let out = dir.path().join("out");
    assert_eq!(run("explain-global", &quick(&data, &out), &["--budget", "9"]).status.code(), Some(2));
    assert_eq!(run("explain-global", &quick(&data, &out), &["--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run("explain-global", &quick(&data, &out), &["--n-inst", "100"]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn protocol_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(&synthetic::ecg_like(0), dir.path(), "Beats");
    let out = dir.path().join("out");
    let pred = format!("external:{}", adapter_command("bad-sum 2"));
    let o = run("explain-global", &quick(&data, &out), &["--predictor", &pred]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sums to"));
    assert!(!out.exists());
}

#[test]
fn config_file_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(&synthetic::ecg_like(0), dir.path(), "Beats");
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, format!("data = {}\nn_inst = 4\nbudget = 3\nsamples = 40\n", data.display())).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_l2gtx"))
        .args(["explain-global", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("L2GTX_SEED", "17")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(out.join("Beats/17/config.txt")).unwrap();
    assert!(written.contains("budget=3\n") && written.contains("seed=17\n"));
}

#[test]
fn explain_local_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(&synthetic::ecg_like(0), dir.path(), "Beats");
    let out = dir.path().join("out");
    let o = run("explain-local", &quick(&data, &out), &["--index", "12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("Beats/0/local_12.json")).unwrap()).unwrap();
    assert_eq!(v["instance_id"], 12);
    let counts: u64 = v["weights_histogram"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts, 40);
    assert_eq!(run("explain-local", &quick(&data, &out), &["--index", "200"]).status.code(), Some(2));
}

#[test]
fn selftest_passes_and_detects_a_corrupted_percentile() {
    let o = l2gtx(&["selftest"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");

    let o = l2gtx(&["selftest", "--corrupt-percentile"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL percentile"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(l2gtx(&["explain-global", "--n-inst", "x"]).status.code(), Some(2));
    assert_eq!(l2gtx(&["frobnicate"]).status.code(), Some(2));
}
