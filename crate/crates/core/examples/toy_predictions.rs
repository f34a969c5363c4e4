//! Scores three hand-made predictions with every scorer and prints the
//! order in which each would pick them.
//!
//! `cargo run --example toy_predictions`

use calibrated_al::sampling::{select_batch, ProbVector, Sampler, ScoredCandidate};

fn main() -> calibrated_al::Result<()> {
    let names = ["P_a", "P_b", "P_c"];
    let preds = [
        ProbVector::new(vec![0.1, 0.1, 0.7, 0.1])?,
        ProbVector::new(vec![0.3, 0.23, 0.23, 0.24])?,
        ProbVector::new(vec![0.5, 0.45, 0.05, 0.0])?,
    ];
    for (name, p) in names.iter().zip(&preds) {
        println!("{name} = {:?}", p.as_slice());
    }
    println!();

    for sampler in Sampler::ALL.into_iter().filter(|s| *s != Sampler::Random) {
        let scored: Vec<ScoredCandidate> = preds
            .iter()
            .enumerate()
            .map(|(i, p)| ScoredCandidate::new(i, sampler.score(p).expect("scoring sampler")))
            .collect::<calibrated_al::Result<_>>()?;
        let picked = select_batch(&scored, preds.len(), sampler.direction())?;
        let scores: Vec<String> = scored.iter().map(|c| format!("{:.4}", c.score)).collect();
        let order: Vec<&str> = picked.iter().map(|&i| names[i]).collect();
        println!(
            "{:<16} scores [{}]  picks {:?} ({:?} first)",
            sampler.name(),
            scores.join(", "),
            order,
            sampler.direction()
        );
    }
    Ok(())
}
