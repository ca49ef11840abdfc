//! Dynamic time warping under absolute-difference local cost, exact and
//! multi-resolution (FastDTW).

use crate::error::{Error, Result};

/// Default FastDTW search radius.
pub const DEFAULT_RADIUS: usize = 8;
/// Series no longer than this are always aligned exactly.
pub const EXACT_FALLBACK_LEN: usize = 64;

/// DTW distance between `a` and `b`.
///
/// Exact when the longer series has at most [`EXACT_FALLBACK_LEN`] points or
/// when `radius` is at least the longer length; FastDTW otherwise.
pub fn dtw_distance(a: &[f64], b: &[f64], radius: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("DTW of an empty series".into()));
    }
    let longest = a.len().max(b.len());
    if longest <= EXACT_FALLBACK_LEN || radius >= longest {
        return Ok(exact(a, b));
    }
    // The coarse-to-fine path depends on argument order; fix one order so the
    // approximation stays symmetric.
    let (a, b) = if canonical_order(a, b) { (a, b) } else { (b, a) };
    Ok(fast(a, b, radius).0)
}

fn canonical_order(a: &[f64], b: &[f64]) -> bool {
    a.len()
        .cmp(&b.len())
        .then_with(|| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .is_le()
}

/// Exact O(nm) DTW with two rolling rows.
pub fn exact(a: &[f64], b: &[f64]) -> f64 {
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, &x) in a.iter().enumerate() {
        for j in 0..m {
            let cost = (x - b[j]).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[j],
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]),
            };
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Per-row inclusive column range `[lo, hi]` of admissible cells.
type Window = Vec<(usize, usize)>;

fn fast(a: &[f64], b: &[f64], radius: usize) -> (f64, Vec<(usize, usize)>) {
    let min_size = radius + 2;
    if a.len() < min_size || b.len() < min_size {
        let full: Window = vec![(0, b.len() - 1); a.len()];
        return windowed(a, b, &full).expect("full window always admits a path");
    }
    let a_half = halve(a);
    let b_half = halve(b);
    let (_, coarse_path) = fast(&a_half, &b_half, radius);
    let window = expand_window(&coarse_path, a.len(), b.len(), radius);
    match windowed(a, b, &window) {
        Some(r) => r,
        None => {
            let full: Window = vec![(0, b.len() - 1); a.len()];
            windowed(a, b, &full).expect("full window always admits a path")
        }
    }
}

fn halve(x: &[f64]) -> Vec<f64> {
    x.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// Grows the coarse path by `radius` cells and projects it to the finer grid.
fn expand_window(path: &[(usize, usize)], n: usize, m: usize, radius: usize) -> Window {
    let mut lo = vec![usize::MAX; n];
    let mut hi = vec![0usize; n];
    let r = radius as isize;
    for &(ci, cj) in path {
        for di in -r..=r {
            let i = ci as isize + di;
            if i < 0 {
                continue;
            }
            let j_lo = (cj as isize - r).max(0) as usize;
            let j_hi = cj + radius;
            for fi in [2 * i as usize, 2 * i as usize + 1] {
                if fi >= n {
                    continue;
                }
                lo[fi] = lo[fi].min(2 * j_lo);
                hi[fi] = hi[fi].max((2 * j_hi + 1).min(m - 1));
            }
        }
    }
    // Rows the projection missed (odd lengths) inherit their neighbour.
    for i in 0..n {
        if lo[i] == usize::MAX {
            let (pl, ph) = if i > 0 { (lo[i - 1], hi[i - 1]) } else { (0, m - 1) };
            lo[i] = pl;
            hi[i] = ph;
        }
    }
    lo[0] = 0;
    hi[n - 1] = m - 1;
    for i in 1..n {
        hi[i] = hi[i].max(hi[i - 1]);
    }
    for i in (0..n - 1).rev() {
        lo[i] = lo[i].min(lo[i + 1]);
    }
    lo.into_iter().zip(hi).map(|(l, h)| (l.min(m - 1), h)).collect()
}

/// DTW restricted to `window`, returning the cost and the warping path.
fn windowed(a: &[f64], b: &[f64], window: &Window) -> Option<(f64, Vec<(usize, usize)>)> {
    let n = a.len();
    let m = b.len();
    let width = |i: usize| window[i].1 + 1 - window[i].0;
    let offsets: Vec<usize> = window
        .iter()
        .scan(0usize, |acc, &(l, h)| {
            let start = *acc;
            *acc += h + 1 - l;
            Some(start)
        })
        .collect();
    let total = offsets[n - 1] + width(n - 1);
    let mut acc = vec![f64::INFINITY; total];
    let get = |acc: &[f64], i: usize, j: usize| -> f64 {
        let (l, h) = window[i];
        if j < l || j > h {
            f64::INFINITY
        } else {
            acc[offsets[i] + j - l]
        }
    };
    for i in 0..n {
        let (l, h) = window[i];
        for j in l..=h {
            let cost = (a[i] - b[j]).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => get(&acc, 0, j - 1),
                (_, 0) => get(&acc, i - 1, 0),
                _ => get(&acc, i - 1, j)
                    .min(get(&acc, i - 1, j - 1))
                    .min(get(&acc, i, j - 1)),
            };
            acc[offsets[i] + j - l] = cost + best;
        }
    }
    let dist = get(&acc, n - 1, m - 1);
    if !dist.is_finite() {
        return None;
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let step = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = get(&acc, i - 1, j - 1);
            let up = get(&acc, i - 1, j);
            let left = get(&acc, i, j - 1);
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        (i, j) = step;
        path.push(step);
    }
    path.reverse();
    Some((dist, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1).unwrap(), 0.0);
    }

    #[test]
    fn single_cell() {
        assert_eq!(dtw_distance(&[0.0], &[3.0], 1).unwrap(), 3.0);
    }

    #[test]
    fn empty_is_domain_error() {
        assert!(dtw_distance(&[], &[1.0], 1).is_err());
    }

    #[test]
    fn warping_absorbs_time_shift() {
        let a = [0.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        let b = [0.0, 1.0, 2.0, 1.0, 0.0, 0.0];
        assert_eq!(exact(&a, &b), 0.0);
    }

    #[test]
    fn fastdtw_upper_bounds_exact_and_stays_close() {
        let a: Vec<f64> = (0..200).map(|i| (i as f64 * 0.11).sin()).collect();
        let b: Vec<f64> = (0..180).map(|i| (i as f64 * 0.12 + 0.4).sin()).collect();
        let ex = exact(&a, &b);
        let fa = dtw_distance(&a, &b, DEFAULT_RADIUS).unwrap();
        assert!(fa >= ex - 1e-9);
        assert!(fa <= ex * 1.25 + 1e-9, "fast {fa} vs exact {ex}");
    }

    #[test]
    fn fastdtw_symmetric_on_equal_lengths() {
        let a: Vec<f64> = (0..97).map(|i| ((i * 7 % 13) as f64).sqrt()).collect();
        let b: Vec<f64> = (0..97).map(|i| ((i * 5 % 11) as f64).ln_1p()).collect();
        let ab = dtw_distance(&a, &b, 2).unwrap();
        let ba = dtw_distance(&b, &a, 2).unwrap();
        assert_eq!(ab, ba);
    }
}
