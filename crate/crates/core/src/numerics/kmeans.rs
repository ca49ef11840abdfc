//! Lloyd's k-means with farthest-point seeding, and silhouette-based choice of k.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Upper bound on the number of points used to score silhouettes.
pub const SILHOUETTE_SUBSAMPLE: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after every assignment step, first entry from the seeding.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Domain("no points".into()))?;
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Shape("points have mixed dimensionality".into()));
    }
    Ok(dim)
}

/// Clusters `points` into `k` groups. Deterministic for a fixed `seed`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    let dim = check_points(points)?;
    if k == 0 || k > points.len() {
        return Err(Error::Domain(format!(
            "k = {k} is outside 1..={}",
            points.len()
        )));
    }

    // Farthest-point seeding from a seeded first centre.
    let mut rng = rng::rng(seed);
    let first = rng.random_range(0..points.len());
    let mut centroids = vec![points[first].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mut far = 0;
        for (i, &d) in min_d.iter().enumerate() {
            if d > min_d[far] {
                far = i;
            }
        }
        centroids.push(points[far].clone());
        let c = centroids.last().unwrap();
        for (d, p) in min_d.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, c));
        }
    }

    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut inertia = 0.0;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let (c, d) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
            inertia += d;
        }
        history.push(inertia);
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // Empty clusters take the point lying farthest from its own centroid.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = -1.0;
            for (i, (p, &a)) in points.iter().zip(&assignments).enumerate() {
                if counts[a] <= 1 {
                    continue;
                }
                let d = sq_dist(p, &centroids[a]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                counts[assignments[i]] -= 1;
                centroids[c] = points[i].clone();
                assignments[i] = c;
                counts[c] = 1;
            }
        }
    }
    let inertia = *history.last().unwrap();
    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
        inertia_history: history,
        iterations,
    })
}

/// Mean silhouette coefficient. Points in singleton clusters score 0.
pub fn mean_silhouette(points: &[Vec<f64>], assignments: &[usize], k: usize) -> f64 {
    let n = points.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                sums[assignments[j]] += sq_dist(&points[i], &points[j]).sqrt();
            }
        }
        let own = assignments[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    /// Set when silhouettes are undefined (too few or all-identical points);
    /// `k` is then `k_min`.
    pub degenerate: bool,
    /// `(k, mean silhouette)` for every candidate scored.
    pub scores: Vec<(usize, f64)>,
}

/// Picks the k in `[k_min, k_max]` maximising the mean silhouette of the
/// k-means partition; ties go to the smaller k. At most
/// [`SILHOUETTE_SUBSAMPLE`] points are scored.
pub fn silhouette_select_k(
    points: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<KSelection> {
    check_points(points)?;
    if k_min < 2 || k_max < k_min {
        return Err(Error::Domain(format!("invalid k range [{k_min}, {k_max}]")));
    }
    let degenerate = KSelection {
        k: k_min,
        degenerate: true,
        scores: Vec::new(),
    };
    let sample: Vec<Vec<f64>> = if points.len() > SILHOUETTE_SUBSAMPLE {
        let mut rng = rng::derived_rng(seed, 0x5111);
        let mut idx = index::sample(&mut rng, points.len(), SILHOUETTE_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| points[i].clone()).collect()
    } else {
        points.to_vec()
    };
    if sample.len() < k_min + 1 || sample.iter().all(|p| p == &sample[0]) {
        return Ok(degenerate);
    }
    let k_max = k_max.min(sample.len() - 1);
    let mut scores = Vec::new();
    let mut best = (k_min, f64::NEG_INFINITY);
    for k in k_min..=k_max {
        let fit = kmeans(&sample, k, rng::derive(seed, k as u64), 100)?;
        let s = mean_silhouette(&sample, &fit.assignments, k);
        scores.push((k, s));
        if s > best.1 {
            best = (k, s);
        }
    }
    Ok(KSelection {
        k: best.0,
        degenerate: false,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn k_one_is_the_mean() {
        let p = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[4.0, 3.0]]);
        let r = kmeans(&p, 1, 0, 50).unwrap();
        assert_eq!(r.centroids[0], vec![2.0, 1.0]);
        assert!((r.inertia - (5.0 + 1.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn separated_pairs_split() {
        let p = pts(&[&[0.0], &[1.0], &[100.0], &[101.0]]);
        let r = kmeans(&p, 2, 9, 50).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
        assert!((r.inertia - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let p = pts(&[&[0.0], &[3.0], &[7.0], &[8.0]]);
        assert_eq!(kmeans(&p, 4, 1, 50).unwrap().inertia, 0.0);
    }

    #[test]
    fn k_too_large_is_domain_error() {
        assert!(kmeans(&pts(&[&[0.0]]), 2, 0, 10).is_err());
    }

    #[test]
    fn identical_points_are_degenerate() {
        let p = vec![vec![1.0, 1.0]; 10];
        let s = silhouette_select_k(&p, 2, 6, 0).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.k, 2);
    }

    #[test]
    fn too_few_points_are_degenerate() {
        let s = silhouette_select_k(&pts(&[&[0.0], &[5.0]]), 2, 6, 0).unwrap();
        assert!(s.degenerate);
    }
}
