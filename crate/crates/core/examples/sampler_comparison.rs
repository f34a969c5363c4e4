//! Every acquisition strategy, with and without cross-mixed training, on
//! six overlapping blob classes. Final-cycle means over the configured seeds.
//!
//! `cargo run --release --example sampler_comparison`

use std::path::Path;

use calibrated_al::experiment::{run_experiment, CmamSpec, ExperimentConfig};
use calibrated_al::sampling::Sampler;

fn main() -> calibrated_al::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/blobs_multiclass.toml");
    let base = ExperimentConfig::from_file(path)?;
    println!(
        "{:<16} {:<12} {:>9} {:>8} {:>8}",
        "sampler", "training", "accuracy", "OE", "ECE"
    );
    for sampler in Sampler::ALL {
        for enabled in [true, false] {
            let config = ExperimentConfig {
                sampler,
                cmam: CmamSpec { enabled, ..base.cmam },
                ..base.clone()
            };
            let last = run_experiment(&config)?.summary.pop().expect("at least one cycle");
            println!(
                "{:<16} {:<12} {:>9.4} {:>8.4} {:>8.4}",
                sampler.name(),
                if enabled { "cross-mixed" } else { "plain" },
                last.accuracy.mean,
                last.oe.mean,
                last.ece.mean
            );
        }
    }
    Ok(())
}
