//! Round-trips a dataset through the UCR tab-separated format, standardises
//! every series and draws a per-class sample.
//!
//! ```bash
//! cargo run --example load_and_standardize [-- path/to/X_TRAIN.tsv]
//! ```

use l2gtx::io::{load_ucr_tsv, sample_per_class, standardize, write_ucr_tsv};
use l2gtx::synthetic;

fn main() -> l2gtx::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let p = std::env::temp_dir().join("ECG200-synthetic_TRAIN.tsv");
            write_ucr_tsv(&synthetic::ecg_like(0), &p)?;
            p
        }
    };
    let data = load_ucr_tsv(&path)?;
    println!("{} from {}", data.name, path.display());
    println!("{} series of length {}, labels {:?}", data.len(), data.series_len(), data.label_names());

    let z = standardize(&data);
    let first = &z.instances()[0];
    println!("series 0: mean {:.2} sd {:.2} -> mean {:.1e} sd {:.6}", data.instances()[0].mean(), data.instances()[0].std(), first.mean(), first.std());

    let sample = sample_per_class(&z, 5, 42)?;
    for (c, ids) in sample.by_class.iter().enumerate() {
        println!("class {}: {:?}", z.label_names()[c], ids);
    }
    Ok(())
}
