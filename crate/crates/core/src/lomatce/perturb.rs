//! Neighbourhood generation by random segment replacement, and DTW kernel
//! weights.

use std::ops::Range;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::TimeSeries;
use crate::numerics::dtw_distance;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMethod {
    /// Replace with zeros.
    Zero,
    /// Replace with the segment's own mean.
    SegmentMean,
    /// Replace with the whole series' mean.
    TotalMean,
    /// Replace with Gaussian draws around the series mean, scaled by the
    /// series standard deviation.
    Noise,
}

impl PerturbMethod {
    pub const ALL: [PerturbMethod; 4] = [
        PerturbMethod::Zero,
        PerturbMethod::SegmentMean,
        PerturbMethod::TotalMean,
        PerturbMethod::Noise,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbRecord {
    pub method: PerturbMethod,
    pub segment: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbourhood {
    /// `samples[0]` is the unmodified instance.
    pub samples: Vec<TimeSeries>,
    /// `log[i - 1]` describes sample `i`.
    pub log: Vec<PerturbRecord>,
}

impl Neighbourhood {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Contiguous segments of (near) equal length covering `0..len`; the last
/// one may be shorter.
pub fn segment_grid(len: usize, n_segments: usize) -> Vec<Range<usize>> {
    let n = n_segments.clamp(1, len.max(1));
    let width = len.div_ceil(n);
    (0..len).step_by(width).map(|s| s..(s + width).min(len)).collect()
}

/// Applies `method` to `segment` of `x`.
pub fn perturb_segment(
    x: &[f64],
    method: PerturbMethod,
    segment: Range<usize>,
    rng: &mut rng::Rng,
) -> Vec<f64> {
    let mut out = x.to_vec();
    let seg = &mut out[segment.clone()];
    match method {
        PerturbMethod::Zero => seg.iter_mut().for_each(|v| *v = 0.0),
        PerturbMethod::SegmentMean => {
            let m = x[segment].iter().sum::<f64>() / seg.len() as f64;
            seg.iter_mut().for_each(|v| *v = m);
        }
        PerturbMethod::TotalMean => {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            seg.iter_mut().for_each(|v| *v = m);
        }
        PerturbMethod::Noise => {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
            match Normal::new(m, sd) {
                Ok(dist) if sd > 0.0 => seg.iter_mut().for_each(|v| *v = dist.sample(rng)),
                _ => seg.iter_mut().for_each(|v| *v = m),
            }
        }
    }
    out
}

/// Builds `n_samples` series: the instance itself, then perturbations each
/// replacing one uniformly chosen segment with a uniformly chosen method.
pub fn perturb_neighbourhood(
    x: &TimeSeries,
    n_samples: usize,
    n_segments: usize,
    seed: u64,
) -> Result<Neighbourhood> {
    if n_samples < 2 {
        return Err(Error::Domain(format!(
            "neighbourhood needs at least 2 samples, got {n_samples}"
        )));
    }
    let grid = segment_grid(x.len(), n_segments);
    let mut rng = rng::rng(seed);
    let mut samples = Vec::with_capacity(n_samples);
    let mut log = Vec::with_capacity(n_samples - 1);
    samples.push(x.clone());
    for _ in 1..n_samples {
        let method = PerturbMethod::ALL[rng.random_range(0..PerturbMethod::ALL.len())];
        let segment = grid[rng.random_range(0..grid.len())].clone();
        let values = perturb_segment(x, method, segment.clone(), &mut rng);
        samples.push(TimeSeries::new(values)?);
        log.push(PerturbRecord { method, segment });
    }
    Ok(Neighbourhood { samples, log })
}

/// Kernel bandwidth choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum SigmaMode {
    /// Median DTW distance of the perturbed samples to the instance.
    Median,
    Fixed(f64),
}

impl Default for SigmaMode {
    fn default() -> Self {
        SigmaMode::Median
    }
}

/// DTW distances from `x` to every sample.
pub fn distances(x: &TimeSeries, samples: &[TimeSeries], radius: usize) -> Result<Vec<f64>> {
    samples.iter().map(|z| dtw_distance(x, z, radius)).collect()
}

/// Resolves the bandwidth for a set of distances. Falls back to the mean
/// positive distance, then to 1, when the median is zero.
pub fn resolve_sigma(mode: SigmaMode, distances: &[f64]) -> Result<f64> {
    match mode {
        SigmaMode::Fixed(s) if s > 0.0 && s.is_finite() => Ok(s),
        SigmaMode::Fixed(s) => Err(Error::Domain(format!("sigma {s} must be positive"))),
        SigmaMode::Median => {
            let mut perturbed: Vec<f64> = distances.iter().skip(1).copied().collect();
            if perturbed.is_empty() {
                return Ok(1.0);
            }
            perturbed.sort_by(f64::total_cmp);
            let mid = perturbed.len() / 2;
            let median = if perturbed.len() % 2 == 0 {
                0.5 * (perturbed[mid - 1] + perturbed[mid])
            } else {
                perturbed[mid]
            };
            if median > 0.0 {
                return Ok(median);
            }
            let positive: Vec<f64> = perturbed.into_iter().filter(|d| *d > 0.0).collect();
            Ok(if positive.is_empty() {
                1.0
            } else {
                positive.iter().sum::<f64>() / positive.len() as f64
            })
        }
    }
}

/// `exp(-d² / σ²)`, kept strictly positive.
pub fn kernel_weights(distances: &[f64], sigma: f64) -> Vec<f64> {
    distances
        .iter()
        .map(|d| (-(d * d) / (sigma * sigma)).exp().max(f64::MIN_POSITIVE))
        .collect()
}

/// DTW-kernel weight of every sample relative to `x`.
pub fn weigh_samples(x: &TimeSeries, samples: &[TimeSeries], sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma {sigma} must be positive")));
    }
    Ok(kernel_weights(&distances(x, samples, radius)?, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_replacement() {
        let mut r = rng::rng(0);
        let out = perturb_segment(&[1.0; 4], PerturbMethod::Zero, 2..4, &mut r);
        assert_eq!(out, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn total_mean_on_constant_is_identity() {
        let mut r = rng::rng(0);
        for seg in segment_grid(7, 3) {
            assert_eq!(perturb_segment(&[3.5; 7], PerturbMethod::TotalMean, seg, &mut r), vec![3.5; 7]);
        }
    }

    #[test]
    fn grid_covers_series() {
        let g = segment_grid(96, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0..10);
        assert_eq!(g[9], 90..96);
        assert_eq!(segment_grid(5, 10).len(), 5);
    }

    #[test]
    fn neighbourhood_is_deterministic_and_keeps_original() {
        let x = ts(&(0..40).map(|i| (i as f64 * 0.3).sin()).collect::<Vec<_>>());
        let a = perturb_neighbourhood(&x, 30, 10, 5).unwrap();
        let b = perturb_neighbourhood(&x, 30, 10, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples[0], x);
        assert_eq!(a.len(), 30);
        assert!(perturb_neighbourhood(&x, 1, 10, 5).is_err());
    }

    #[test]
    fn weights_follow_kernel() {
        let x = ts(&[0.0, 0.0, 0.0]);
        let w = weigh_samples(&x, &[x.clone(), ts(&[0.0, 0.0, 2.0])], 2.0, 8).unwrap();
        assert_eq!(w[0], 1.0);
        assert!((w[1] - (-1.0f64).exp()).abs() < 1e-6);
        let k = kernel_weights(&[0.0, 0.5, 1.0, 3.0], 1.0);
        assert!(k.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn median_sigma_ignores_original() {
        assert_eq!(resolve_sigma(SigmaMode::Median, &[0.0, 1.0, 3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(resolve_sigma(SigmaMode::Median, &[0.0, 0.0, 0.0, 4.0]).unwrap(), 4.0);
        assert_eq!(resolve_sigma(SigmaMode::Median, &[0.0, 0.0]).unwrap(), 1.0);
    }
}
