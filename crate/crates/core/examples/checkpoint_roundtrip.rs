//! Saves a trained classifier to disk, then scores the unlabeled pool with
//! the reloaded copy.
//!
//! `cargo run --example checkpoint_roundtrip`

use calibrated_al::cmam::{fit, TrainingMode};
use calibrated_al::data::{gen_blobs, init_pool};
use calibrated_al::model::{load_checkpoint, save_checkpoint, MlpModel, TrainConfig};
use calibrated_al::sampling::{score_candidates, select_batch, Sampler};
use calibrated_al::{Purpose, Result, RngStream};

fn main() -> Result<()> {
    let d = gen_blobs(50, 4, 2, 1.5, &mut RngStream::new(1, Purpose::DataGen))?;
    let pool = init_pool(d.len(), 40, &mut RngStream::new(1, Purpose::Shuffle))?;
    let mut m = MlpModel::init(&[2, 16], 4, &mut RngStream::new(1, Purpose::Init))?;
    let cfg = TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    };
    let mode = TrainingMode::Cmam {
        alpha: 0.4,
        mix_point: 1,
    };
    let stats = fit(
        &mut m,
        &d,
        &pool,
        mode,
        &cfg,
        &mut RngStream::with_substream(1, Purpose::Shuffle, 1),
        &mut RngStream::new(1, Purpose::Beta),
    )?;
    println!(
        "trained {} parameters, last epoch loss {:.4}",
        m.num_parameters(),
        stats.mean_loss
    );

    let path = std::env::temp_dir().join("calibrated_al_example.ckpt");
    save_checkpoint(&m, &path)?;
    let reloaded = load_checkpoint(&path)?;
    println!(
        "reloaded {:?} from {}, identical: {}",
        reloaded.widths(),
        path.display(),
        reloaded == m
    );

    let unlabeled = pool.unlabeled_indices();
    let probs = reloaded.predict_proba(&d.features().select_rows(&unlabeled)?)?;
    let scored = score_candidates(Sampler::RankedMs, &unlabeled, &probs)?;
    let next = select_batch(&scored, 5, Sampler::RankedMs.direction())?;
    println!("next five to label: {next:?}");
    std::fs::remove_file(&path).ok();
    Ok(())
}
