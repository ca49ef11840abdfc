//! Exact DTW against the banded approximation on two heartbeats.
//!
//! ```bash
//! cargo run --release --example dtw_distance
//! ```

use l2gtx::io::standardize;
use l2gtx::numerics::dtw;
use l2gtx::synthetic;

fn main() -> l2gtx::Result<()> {
    let data = standardize(&synthetic::ecg_like(3));
    let normal = data.instances()[data.class_indices(2)[0]].values();
    let abnormal = data.instances()[data.class_indices(1)[0]].values();

    let euclid = normal.iter().zip(abnormal).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    println!("euclidean          {euclid:.4}");
    println!("dtw exact          {:.4}", dtw::exact(normal, abnormal));
    for radius in [1, 2, 4, 8] {
        println!("fastdtw radius {radius:<2}  {:.4}", dtw::dtw_distance(normal, abnormal, radius)?);
    }
    // Series this short fall back to the exact recursion whatever the radius.
    let (a, b) = (&normal[..40], &abnormal[..40]);
    assert_eq!(dtw::dtw_distance(a, b, 1)?, dtw::exact(a, b));
    Ok(())
}
