//! Walks through one cross-mixed batch from coefficient draw to optimizer
//! step. Then shows that pinning the feature coefficient to 1 turns the
//! step into ordinary input mixup.
//!
//! `cargo run --example cmam_mixing`

use calibrated_al::cmam::{build_mixed_batch, cmam_step, mixup_pair, plain_step, LambdaSource, MixCoefficients};
use calibrated_al::data::gen_two_moons;
use calibrated_al::model::{MlpModel, TrainConfig, Velocity};
use calibrated_al::numeric::shuffled_pairs;
use calibrated_al::{Purpose, Result, RngStream};

fn main() -> Result<()> {
    let seed = 11;
    let d = gen_two_moons(8, 0.1, &mut RngStream::new(seed, Purpose::DataGen))?;
    let pairs = shuffled_pairs(d.len(), &mut RngStream::new(seed, Purpose::Shuffle))?;
    println!("pairs: {pairs:?}");

    let coeffs = LambdaSource::Beta { alpha: 0.4 }.draw(&mut RngStream::new(seed, Purpose::Beta))?;
    println!(
        "lambda1 = {:.4}, lambda2 = {:.4}  ->  a = {:.4}, b = {:.4}",
        coeffs.lambda1(),
        coeffs.lambda2(),
        coeffs.a(),
        coeffs.b()
    );

    let batch = build_mixed_batch(&d, &pairs, coeffs)?;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        println!(
            "pair ({i},{j}) labels ({},{}): x1' = {:?}  x2' = {:?}  target = {:?}",
            d.labels()[i],
            d.labels()[j],
            fmt(batch.xdot1.row(k)),
            fmt(batch.xdot2.row(k)),
            fmt(batch.targets.row(k)),
        );
    }

    let cfg = TrainConfig::default();
    let mut m = MlpModel::init(&[2, 16, 16], 2, &mut RngStream::new(seed, Purpose::Init))?;
    let mut v = Velocity::zeros(&m);
    println!(
        "\nloss on the first step at mix point 1: {:.5}",
        cmam_step(&mut m, &batch, 1, &cfg, &mut v, 0)?
    );

    // With lambda2 = 1 only the first mixed input reaches the head.
    let fresh = MlpModel::init(&[2, 16, 16], 2, &mut RngStream::new(seed, Purpose::Init))?;
    let pinned = build_mixed_batch(&d, &pairs, MixCoefficients::new(coeffs.lambda1(), 1.0)?)?;
    let (first, second): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
    let (x, y) = mixup_pair(
        &d.features().select_rows(&first)?,
        &d.features().select_rows(&second)?,
        &d.one_hot(&first)?,
        &d.one_hot(&second)?,
        coeffs.lambda1(),
    )?;
    let (mut a, mut b) = (fresh.clone(), fresh.clone());
    let la = cmam_step(&mut a, &pinned, 1, &cfg, &mut Velocity::zeros(&fresh), 0)?;
    let lb = plain_step(&mut b, &x, &y, &cfg, &mut Velocity::zeros(&fresh), 0)?;
    let gap = a
        .parameters()
        .iter()
        .zip(b.parameters())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    println!("lambda2 = 1: cross-mixed loss {la:.12}, mixup loss {lb:.12}, max parameter gap {gap:e}");
    Ok(())
}

fn fmt(row: &[f64]) -> Vec<String> {
    row.iter().map(|v| format!("{v:.3}")).collect()
}
