//! Local explanation of one heartbeat under a calibrated nearest-centroid
//! classifier.
//!
//! ```bash
//! cargo run --release --example explain_local [-- INDEX]
//! ```

use l2gtx::io::standardize;
use l2gtx::lomatce::explain_instance;
use l2gtx::predictor::{fit_calibrated_centroid, Predictor};
use l2gtx::{synthetic, LomatceConfig};

fn main() -> l2gtx::Result<()> {
    let index: usize = std::env::args().nth(1).map_or(0, |s| s.parse().expect("index"));
    let data = standardize(&synthetic::ecg_like(0));
    let model = fit_calibrated_centroid(&data)?;
    let x = &data.instances()[index];
    let p = model.predict_proba(std::slice::from_ref(x))?;
    println!("instance {index}: label {}, probabilities {:.3?}, T = {:.3}", data.label_names()[data.labels()[index] - 1], p.row(0), model.temperature());

    let e = explain_instance(x, index, &model, &LomatceConfig::default(), 0)?;
    println!("predicted class {}, fidelity {:?}", data.label_names()[e.predicted_class - 1], e.fidelity);
    for c in &e.clusters {
        println!("  {:>2} {:<10} {:+.4}  centroid {:.2?}  own events {}", c.cluster_id, c.kind, c.importance, c.centroid, c.events.len());
    }
    Ok(())
}
