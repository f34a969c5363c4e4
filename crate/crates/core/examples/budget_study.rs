//! A fixed labeling budget spent in batches of different sizes.
//!
//! `cargo run --release --example budget_study`

use std::path::Path;

use calibrated_al::experiment::{run_experiment, ExperimentConfig, LoopSpec};
use calibrated_al::sampling::Sampler;

fn main() -> calibrated_al::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/trend_cmam_rankedms.toml");
    let base = ExperimentConfig::from_file(path)?;
    let total = 200;

    println!(
        "{:>6} {:>7} {:<10} {:>9} {:>8}",
        "batch", "cycles", "sampler", "accuracy", "OE"
    );
    for batch in [10, 20, 40] {
        let active_loop = LoopSpec {
            initial_budget: batch,
            budget_per_cycle: batch,
            cycles: total / batch,
        };
        for sampler in [Sampler::RankedMs, Sampler::Random] {
            let config = ExperimentConfig {
                active_loop,
                sampler,
                ..base.clone()
            };
            let last = run_experiment(&config)?.summary.pop().expect("at least one cycle");
            println!(
                "{batch:>6} {:>7} {:<10} {:>9.4} {:>8.4}",
                active_loop.cycles,
                sampler.name(),
                last.accuracy.mean,
                last.oe.mean
            );
        }
    }
    Ok(())
}
