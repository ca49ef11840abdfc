//! Built-in consistency checks of the numeric core against [`crate::oracle`].

use rand::Rng as _;
use serde::Serialize;

use crate::l2gtx::{global_importance, mean_std, select_instances, InstanceClusterMatrix};
use crate::numerics::{dtw, percentile, r_squared, weighted_ridge};
use crate::{oracle, rng};

/// Deliberate faults, so callers can confirm the checks bite.
#[derive(Debug, Clone, Copy, Default)]
pub struct Faults {
    /// Replace the interpolated percentile by the nearest lower rank.
    pub corrupt_percentile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: usize, cases: usize, worst: f64) -> Check {
    Check {
        name,
        passed: failures == 0,
        detail: format!("{failures}/{cases} mismatches, worst deviation {worst:.3e}"),
    }
}

fn random_vec(r: &mut rng::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-2.0..2.0)).collect()
}

fn dtw_check(seed: u64) -> Check {
    let mut r = rng::derived_rng(seed, 1);
    let (mut fails, mut worst) = (0, 0.0f64);
    for _ in 0..200 {
        let (n, m) = (r.random_range(1..=24), r.random_range(1..=24));
        let (a, b) = (random_vec(&mut r, n), random_vec(&mut r, m));
        let got = dtw::dtw_distance(&a, &b, dtw::DEFAULT_RADIUS).unwrap_or(f64::NAN);
        let want = oracle::dtw_full_matrix(&a, &b);
        let dev = (got - want).abs();
        worst = worst.max(if dev.is_nan() { f64::INFINITY } else { dev });
        if got != want {
            fails += 1;
        }
    }
    check("dtw", fails, 200, worst)
}

fn ridge_check(seed: u64) -> Check {
    let mut r = rng::derived_rng(seed, 2);
    let (mut fails, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let n = r.random_range(8..40);
        let k = r.random_range(1..6);
        let z: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| r.random_range(0..4) as f64).collect()).collect();
        let y = random_vec(&mut r, n);
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
        let lambda = r.random_range(0.1..2.0);
        let (Ok(fit), Some((b0, beta))) = (weighted_ridge(&z, &y, &w, lambda), oracle::ridge_normal_equations(&z, &y, &w, lambda))
        else {
            fails += 1;
            continue;
        };
        let dev = beta
            .iter()
            .zip(&fit.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold((fit.intercept - b0).abs(), f64::max);
        let yhat: Vec<f64> = z.iter().map(|row| fit.predict_row(row)).collect();
        let r2 = r_squared(&y, &yhat, &w).ok().flatten().unwrap_or(f64::NAN);
        let dev = dev.max((r2 - oracle::weighted_r2(&y, &yhat, &w)).abs());
        worst = worst.max(dev);
        if !(dev <= 1e-8) {
            fails += 1;
        }
    }
    check("ridge", fails, 100, worst)
}

fn greedy_check(seed: u64) -> Check {
    let mut r = rng::derived_rng(seed, 3);
    let mut fails = 0;
    for _ in 0..100 {
        let (n, g) = (r.random_range(1..12), r.random_range(1..10));
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..g)
                    .map(|_| if r.random_bool(0.35) { r.random_range(-1.0..1.0) } else { 0.0 })
                    .collect()
            })
            .collect();
        let m = InstanceClusterMatrix {
            instance_ids: (0..n).collect(),
            values: values.clone(),
            cluster_count: g,
        };
        let imp = global_importance(&m);
        let budget = r.random_range(1..=n + 1);
        let got = select_instances(&m, &imp, budget, 1e-9).map(|s| s.rows);
        if imp != oracle::importance_direct(&values, g) || got.ok() != Some(oracle::greedy_brute_force(&values, &imp, budget, 1e-9)) {
            fails += 1;
        }
    }
    check("greedy", fails, 100, 0.0)
}

fn percentile_check(seed: u64, faults: Faults) -> Check {
    let pct = |v: &[f64], p: f64| {
        if faults.corrupt_percentile {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s[(p / 100.0 * (s.len() - 1) as f64).floor() as usize]
        } else {
            percentile(v, p).unwrap_or(f64::NAN)
        }
    };
    let mut r = rng::derived_rng(seed, 4);
    let (mut fails, mut worst) = (0, 0.0f64);
    let mut cases: Vec<(Vec<f64>, f64)> = vec![(vec![1.0, 2.0, 3.0, 4.0], 50.0), (vec![1.0, 2.0, 3.0, 4.0], 25.0)];
    for _ in 0..100 {
        let n = r.random_range(1..30);
        cases.push((random_vec(&mut r, n), [25.0, 50.0, 75.0, 95.0][r.random_range(0..4)]));
    }
    for (v, p) in &cases {
        let dev = (pct(v, *p) - oracle::percentile_linear(v, *p)).abs();
        worst = worst.max(dev);
        if !(dev <= 1e-12) {
            fails += 1;
        }
    }
    check("percentile", fails, cases.len(), worst)
}

fn stats_check(seed: u64) -> Check {
    let mut r = rng::derived_rng(seed, 5);
    let (mut fails, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let n = r.random_range(1..50);
        let v: Vec<f64> = (0..n).map(|_| r.random_range(0.0..96.0)).collect();
        let (m, s) = mean_std(&v);
        let (om, os) = oracle::two_pass_stats(&v);
        let dev = (m - om).abs().max((s - os).abs());
        worst = worst.max(dev);
        if !(dev <= 1e-12) {
            fails += 1;
        }
    }
    check("attribute statistics", fails, 100, worst)
}

/// Runs every check with seed `seed`.
pub fn run(seed: u64, faults: Faults) -> Vec<Check> {
    vec![
        dtw_check(seed),
        ridge_check(seed),
        greedy_check(seed),
        percentile_check(seed, faults),
        stats_check(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        for c in run(7, Faults::default()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn corrupted_percentile_is_caught() {
        let checks = run(7, Faults { corrupt_percentile: true });
        let p = checks.iter().find(|c| c.name == "percentile").unwrap();
        assert!(!p.passed);
        assert!(checks.iter().filter(|c| c.name != "percentile").all(|c| c.passed));
    }
}
