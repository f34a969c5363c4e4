use std::path::Path;

use calibrated_al::experiment::{resolve_data, ExperimentConfig};

#[test]
fn every_shipped_config_parses_and_resolves() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let data = resolve_data(&c, c.seeds[0]).unwrap();
            assert!(data.pool.len() >= c.active_loop.final_labeled(), "{}", path.display());
            assert_eq!(Some(data.pool.len()), c.pool_size());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn trend_configs_differ_only_in_method() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let ours = ExperimentConfig::from_file(dir.join("trend_cmam_rankedms.toml")).unwrap();
    let random = ExperimentConfig::from_file(dir.join("trend_random.toml")).unwrap();
    assert!(ours.cmam.enabled && !random.cmam.enabled);
    let aligned = ExperimentConfig {
        sampler: ours.sampler,
        cmam: ours.cmam,
        ..random
    };
    assert_eq!(aligned, ours);
}
