//! Drives a classifier in another process over the JSON-lines protocol.
//! Defaults to the test adapter answering uniform probabilities.
//!
//! ```bash
//! cargo run --example external_predictor [-- "python3 my_adapter.py"]
//! ```

use l2gtx::predictor::{ExternalPredictor, Predictor};
use l2gtx::synthetic;

fn main() -> l2gtx::Result<()> {
    let line = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("python3 {}/tests/fixtures/adapter.py uniform 2", env!("CARGO_MANIFEST_DIR")));
    let model = ExternalPredictor::from_command_line(&line)?.with_batch_cap(64);
    println!("{model:?}");

    let data = synthetic::ecg_like(0);
    let p = model.predict_proba(&data.instances()[..150])?;
    println!("{} rows of {} classes, first {:.3?}", p.len(), p.classes(), p.row(0));
    Ok(())
}
