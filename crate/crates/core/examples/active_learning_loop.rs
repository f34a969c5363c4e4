//! Two moons, ten acquisition rounds: cross-mixed training with the
//! rank-weighted margin against ordinary training with random picks.
//!
//! `cargo run --release --example active_learning_loop`

use std::path::Path;

use calibrated_al::experiment::{run_experiment, ExperimentConfig};

fn main() -> calibrated_al::Result<()> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let ours = run_experiment(&ExperimentConfig::from_file(configs.join("trend_cmam_rankedms.toml"))?)?;
    let random = run_experiment(&ExperimentConfig::from_file(configs.join("trend_random.toml"))?)?;

    println!("mean ± std over {} seeds", ours.config.seeds.len());
    println!("{:>7}  {:^23}  {:^23}", "", "cross-mix + rankedms", "plain + random");
    println!(
        "{:>7}  {:>11} {:>11}  {:>11} {:>11}",
        "labeled", "accuracy", "OE", "accuracy", "OE"
    );
    for (a, b) in ours.summary.iter().zip(&random.summary) {
        println!(
            "{:>7}  {:.3}±{:.3} {:.4}±{:.3}  {:.3}±{:.3} {:.4}±{:.3}",
            a.labeled,
            a.accuracy.mean,
            a.accuracy.std,
            a.oe.mean,
            a.oe.std,
            b.accuracy.mean,
            b.accuracy.std,
            b.oe.mean,
            b.oe.std
        );
    }
    Ok(())
}
