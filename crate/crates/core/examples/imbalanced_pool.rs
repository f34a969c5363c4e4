//! Ten blob classes, five of them a hundred times rarer in the pool. Prints
//! how many samples of the rare classes each acquisition strategy manages
//! to label.
//!
//! `cargo run --release --example imbalanced_pool`

use std::path::Path;

use calibrated_al::experiment::{run_trial_with, ExperimentConfig};
use calibrated_al::sampling::Sampler;

fn main() -> calibrated_al::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/imbalanced_blobs.toml");
    let base = ExperimentConfig::from_file(path)?;
    let rare = base.imbalance.clone().expect("config is imbalanced").minority_classes;
    let seed = base.seeds[0];

    for sampler in [Sampler::RankedMs, Sampler::Entropy, Sampler::Random] {
        let config = ExperimentConfig {
            sampler,
            ..base.clone()
        };
        let mut lines = Vec::new();
        run_trial_with(&config, seed, |v| {
            if v.report.cycle == 1 {
                let counts = v.data.class_counts();
                lines.push(format!("pool class counts {counts:?}"));
            }
            let labels = v.data.labels();
            let rare_labeled = v.pool.labeled().iter().filter(|&&i| rare.contains(&labels[i])).count();
            lines.push(format!(
                "cycle {:>2}: {:>3} labeled, {:>2} rare, accuracy {:.3}",
                v.report.cycle, v.report.labeled_count, rare_labeled, v.report.test_accuracy
            ));
            Ok(())
        })?;
        println!("== {sampler}");
        for l in lines {
            println!("  {l}");
        }
    }
    Ok(())
}
