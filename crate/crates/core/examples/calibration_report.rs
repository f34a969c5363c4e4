//! Trains one model with and one without cross-mixing on the same labeled
//! pool and prints their reliability tables.
//!
//! `cargo run --release --example calibration_report [dump.csv]`

use calibrated_al::cmam::{fit, TrainingMode};
use calibrated_al::data::{gen_two_moons, init_pool};
use calibrated_al::metrics::{
    accuracy, evaluate, expected_calibration_error, overconfidence_error, reliability_bins, write_sample_dump,
};
use calibrated_al::model::{MlpModel, TrainConfig};
use calibrated_al::{Purpose, Result, RngStream};

fn main() -> Result<()> {
    let seed = 5;
    let pool = gen_two_moons(2000, 0.2, &mut RngStream::new(seed, Purpose::DataGen))?;
    let test = gen_two_moons(500, 0.2, &mut RngStream::new(seed, Purpose::TestSplit))?;
    let labeled = init_pool(pool.len(), 60, &mut RngStream::new(seed, Purpose::Shuffle))?;
    let cfg = TrainConfig::default();

    for (name, mode) in [
        ("plain", TrainingMode::Plain),
        (
            "cross-mixed",
            TrainingMode::Cmam {
                alpha: 0.4,
                mix_point: 1,
            },
        ),
    ] {
        let mut m = MlpModel::init(&[2, 32, 32], 2, &mut RngStream::new(seed, Purpose::Init))?;
        fit(
            &mut m,
            &pool,
            &labeled,
            mode,
            &cfg,
            &mut RngStream::with_substream(seed, Purpose::Shuffle, 1),
            &mut RngStream::new(seed, Purpose::Beta),
        )?;
        let records = evaluate(&m, &test)?;
        println!(
            "== {name}: accuracy {:.4}, OE {:.4}, ECE {:.4}",
            accuracy(&records)?,
            overconfidence_error(&records, 10)?,
            expected_calibration_error(&records, 10)?
        );
        println!("   bin          count  confidence  accuracy");
        for b in reliability_bins(&records, 10)?.iter().filter(|b| b.count > 0) {
            println!(
                "   ({:.1}, {:.1}]  {:>5}  {:>10.4}  {:>8.4}",
                b.bin_low, b.bin_high, b.count, b.mean_confidence, b.accuracy
            );
        }
        if let (Some(path), TrainingMode::Cmam { .. }) = (std::env::args().nth(1), mode) {
            write_sample_dump(&records, &path)?;
            println!("   per-sample records written to {path}");
        }
    }
    Ok(())
}
