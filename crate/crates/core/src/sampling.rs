//! Acquisition scoring and batch selection.
//!
//! The rank-weighted margin sorts a prediction's probabilities in
//! descending order and sums the consecutive gaps, dividing the gap between
//! ranks `k` and `k + 1` by `k`. It is `0` for a uniform prediction and `1`
//! for a one-hot one; the lowest scores are selected. Entropy, top-2 margin,
//! least confidence and uniform random selection are the baselines.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::PoolState;
use crate::error::{invalid, io_err, Error, Result};
use crate::numeric::RngStream;

const SIMPLEX_TOL: f64 = 1e-9;

/// A probability vector over `C >= 2` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid(format!("need at least 2 classes, got {}", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid(format!("probability {p} is not a finite non-negative number")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(probs))
    }

    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }

    fn sorted_desc(&self) -> Vec<f64> {
        let mut s = self.0.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Rank-weighted margin: `Σ_{k=1}^{C-1} (P⁽ᵏ⁾ − P⁽ᵏ⁺¹⁾) / k` over the
/// descending-sorted probabilities. Higher means more confident.
pub fn score_rankedms(p: &ProbVector) -> f64 {
    let s = p.sorted_desc();
    s.windows(2)
        .enumerate()
        .map(|(k, w)| (w[0] - w[1]) / (k + 1) as f64)
        .sum()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`. Higher means more uncertain.
pub fn score_entropy(p: &ProbVector) -> f64 {
    -p.0.iter().filter(|&&q| q > 0.0).map(|&q| q * q.ln()).sum::<f64>()
}

/// Gap between the two largest probabilities.
pub fn score_margin(p: &ProbVector) -> f64 {
    let s = p.sorted_desc();
    s[0] - s[1]
}

/// The largest probability.
pub fn score_least_confidence(p: &ProbVector) -> f64 {
    p.max()
}

/// Which end of the score ordering is selected first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    #[serde(rename = "rankedms")]
    RankedMs,
    Entropy,
    Margin,
    LeastConfidence,
    Random,
}

impl Sampler {
    pub const ALL: [Sampler; 5] = [
        Sampler::RankedMs,
        Sampler::Entropy,
        Sampler::Margin,
        Sampler::LeastConfidence,
        Sampler::Random,
    ];

    /// `None` for [`Sampler::Random`], which does not score.
    pub fn score(self, p: &ProbVector) -> Option<f64> {
        match self {
            Sampler::RankedMs => Some(score_rankedms(p)),
            Sampler::Entropy => Some(score_entropy(p)),
            Sampler::Margin => Some(score_margin(p)),
            Sampler::LeastConfidence => Some(score_least_confidence(p)),
            Sampler::Random => None,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Sampler::Entropy => Direction::Largest,
            _ => Direction::Smallest,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sampler::RankedMs => "rankedms",
            Sampler::Entropy => "entropy",
            Sampler::Margin => "margin",
            Sampler::LeastConfidence => "least_confidence",
            Sampler::Random => "random",
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Sampler::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| invalid(format!("unknown sampler {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub pool_index: usize,
    pub score: f64,
}

impl ScoredCandidate {
    pub fn new(pool_index: usize, score: f64) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::NonFinite("ScoredCandidate::new"));
        }
        Ok(Self { pool_index, score })
    }
}

/// Scores each prediction, pairing it with the pool index at the same
/// position.
pub fn score_candidates(
    sampler: Sampler,
    pool_indices: &[usize],
    probs: &[ProbVector],
) -> Result<Vec<ScoredCandidate>> {
    if pool_indices.len() != probs.len() {
        return Err(invalid(format!(
            "{} indices for {} predictions",
            pool_indices.len(),
            probs.len()
        )));
    }
    pool_indices
        .iter()
        .zip(probs)
        .map(|(&i, p)| {
            let s = sampler
                .score(p)
                .ok_or_else(|| invalid("the random sampler does not score candidates"))?;
            ScoredCandidate::new(i, s)
        })
        .collect()
}

/// The `b` most extreme candidates, extreme-first; equal scores go to the
/// lower pool index first.
pub fn select_batch(scores: &[ScoredCandidate], b: usize, direction: Direction) -> Result<Vec<usize>> {
    if b > scores.len() {
        return Err(invalid(format!("budget {b} exceeds {} candidates", scores.len())));
    }
    let mut order: Vec<&ScoredCandidate> = scores.iter().collect();
    order.sort_by(|x, y| {
        let by_score = match direction {
            Direction::Smallest => x.score.total_cmp(&y.score),
            Direction::Largest => y.score.total_cmp(&x.score),
        };
        by_score.then(x.pool_index.cmp(&y.pool_index))
    });
    Ok(order.into_iter().take(b).map(|c| c.pool_index).collect())
}

/// A uniform `b`-subset of the unlabeled pool, in draw order.
pub fn select_random(pool: &PoolState, b: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let unlabeled = pool.unlabeled_indices();
    if b > unlabeled.len() {
        return Err(invalid(format!(
            "budget {b} exceeds {} unlabeled samples",
            unlabeled.len()
        )));
    }
    let perm = rng.permutation(unlabeled.len());
    Ok(perm[..b].iter().map(|&k| unlabeled[k]).collect())
}

/// Moves `selected` from the unlabeled to the labeled side.
pub fn apply_selection(pool: &PoolState, selected: &[usize]) -> Result<PoolState> {
    let mut next = pool.clone();
    next.label(selected)?;
    Ok(next)
}

/// Scores every row of a CSV of probability rows (optional header).
pub fn score_probability_file(sampler: Sampler, path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let rows = crate::data::read_rows(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, record) in rows {
        let probs = record
            .iter()
            .enumerate()
            .map(|(col, f)| crate::data::parse_real(f, line, col))
            .collect::<Result<Vec<f64>>>()?;
        let p = ProbVector::new(probs).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let s = sampler
            .score(&p)
            .ok_or_else(|| invalid("the random sampler does not score candidates"))?;
        out.push(s);
    }
    Ok(out)
}

/// Writes `row,score` with a header; rows are 0-based.
pub fn write_scores(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("row,score\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{i},{s}\n"));
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Purpose;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn toy() -> [ProbVector; 3] {
        [
            pv(&[0.1, 0.1, 0.7, 0.1]),
            pv(&[0.3, 0.23, 0.23, 0.24]),
            pv(&[0.5, 0.45, 0.05, 0.0]),
        ]
    }

    #[test]
    fn rankedms_extremes() {
        assert_eq!(score_rankedms(&pv(&[0.25; 4])), 0.0);
        assert_eq!(score_rankedms(&pv(&[1.0, 0.0, 0.0, 0.0])), 1.0);
    }

    #[test]
    fn rankedms_toy_values() {
        let [a, b, c] = toy();
        assert!((score_rankedms(&a) - 0.6).abs() < 1e-12);
        assert!((score_rankedms(&b) - 0.065).abs() < 1e-12);
        assert!((score_rankedms(&c) - (0.05 + 0.2 + 0.05 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        assert!((score_entropy(&pv(&[0.25; 4])) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(score_entropy(&pv(&[0.0, 1.0])), 0.0);
        let [a, b, c] = toy();
        assert!((score_entropy(&b) - 1.3797).abs() < 1e-4);
        assert!((score_entropy(&a) - 0.9405).abs() < 1e-4);
        assert!((score_entropy(&c) - 0.8557).abs() < 1e-4);
    }

    #[test]
    fn margin_and_least_confidence() {
        assert_eq!(score_margin(&pv(&[0.25; 4])), 0.0);
        assert_eq!(score_margin(&pv(&[0.0, 1.0, 0.0])), 1.0);
        let [a, b, c] = toy();
        assert!((score_margin(&c) - 0.05).abs() < 1e-12);
        assert!((score_margin(&b) - 0.06).abs() < 1e-12);
        assert!((score_margin(&a) - 0.6).abs() < 1e-12);
        assert_eq!(score_least_confidence(&pv(&[0.0, 1.0])), 1.0);
        assert_eq!(score_least_confidence(&pv(&[0.2; 5])), 0.2);
        assert_eq!(score_least_confidence(&c), 0.5);
    }

    #[test]
    fn invalid_simplex_rejected() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.0]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn select_all_and_ties() {
        let c: Vec<ScoredCandidate> = [(5, 0.3), (2, 0.1), (9, 0.3), (1, 0.2)]
            .iter()
            .map(|&(i, s)| ScoredCandidate::new(i, s).unwrap())
            .collect();
        assert_eq!(select_batch(&c, 4, Direction::Smallest).unwrap(), vec![2, 1, 5, 9]);
        assert_eq!(select_batch(&c, 2, Direction::Largest).unwrap(), vec![5, 9]);
        assert!(select_batch(&c, 5, Direction::Smallest).is_err());
    }

    #[test]
    fn select_matches_full_sort_oracle() {
        let mut rng = RngStream::new(8, Purpose::SelectTiebreak);
        let cands: Vec<ScoredCandidate> = (0..200)
            .map(|i| ScoredCandidate::new(i * 3, (rng.uniform() * 20.0).floor() / 20.0).unwrap())
            .collect();
        for dir in [Direction::Smallest, Direction::Largest] {
            // oracle: repeatedly extract the extreme element by linear scan
            let mut remaining = cands.clone();
            let mut expected = Vec::new();
            for _ in 0..10 {
                let mut best = 0;
                for (k, c) in remaining.iter().enumerate() {
                    let b = &remaining[best];
                    let better = match dir {
                        Direction::Smallest => c.score < b.score,
                        Direction::Largest => c.score > b.score,
                    };
                    if better || (c.score == b.score && c.pool_index < b.pool_index) {
                        best = k;
                    }
                }
                expected.push(remaining.remove(best).pool_index);
            }
            assert_eq!(select_batch(&cands, 10, dir).unwrap(), expected);
        }
    }

    #[test]
    fn random_selection_properties() {
        let pool = PoolState::new(50, 0..10).unwrap();
        let mut all = select_random(&pool, 40, &mut RngStream::new(1, Purpose::SelectTiebreak)).unwrap();
        all.sort_unstable();
        assert_eq!(all, pool.unlabeled_indices());
        let a = select_random(&pool, 5, &mut RngStream::new(2, Purpose::SelectTiebreak)).unwrap();
        let b = select_random(&pool, 5, &mut RngStream::new(2, Purpose::SelectTiebreak)).unwrap();
        assert_eq!(a, b);
        assert!(select_random(&pool, 41, &mut RngStream::new(2, Purpose::SelectTiebreak)).is_err());
    }

    #[test]
    fn random_inclusion_frequency() {
        let pool = PoolState::new(20, []).unwrap();
        let (b, trials) = (5usize, 10_000usize);
        let mut rng = RngStream::new(4, Purpose::SelectTiebreak);
        let mut hits = vec![0usize; 20];
        for _ in 0..trials {
            for i in select_random(&pool, b, &mut rng).unwrap() {
                hits[i] += 1;
            }
        }
        let p = b as f64 / 20.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h as f64 - trials as f64 * p).abs() < 3.0 * sigma + 1.0);
        }
    }

    #[test]
    fn apply_selection_moves_exactly() {
        let pool = PoolState::new(6, [0]).unwrap();
        assert_eq!(apply_selection(&pool, &[]).unwrap(), pool);
        let all = apply_selection(&pool, &pool.unlabeled_indices()).unwrap();
        assert!(all.unlabeled().is_empty());
        assert!(apply_selection(&pool, &[0]).is_err());
        let next = apply_selection(&pool, &[3, 1]).unwrap();
        assert_eq!(next.labeled().len(), 3);
    }

    #[test]
    fn sampler_names_round_trip() {
        for s in Sampler::ALL {
            assert_eq!(s.name().parse::<Sampler>().unwrap(), s);
        }
        assert_eq!("least-confidence".parse::<Sampler>().unwrap(), Sampler::LeastConfidence);
        assert!("coreset".parse::<Sampler>().is_err());
    }

    #[test]
    fn probability_file_scoring() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        std::fs::write(&p, "p0,p1,p2,p3\n0.1,0.1,0.7,0.1\n0.25,0.25,0.25,0.25\n").unwrap();
        let s = score_probability_file(Sampler::RankedMs, &p).unwrap();
        assert!((s[0] - 0.6).abs() < 1e-12 && s[1] == 0.0);
        let out = dir.path().join("s.csv");
        write_scores(&out, &s).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("row,score\n0,"));
        std::fs::write(&p, "0.5,0.6\n").unwrap();
        assert!(matches!(
            score_probability_file(Sampler::Margin, &p),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(score_probability_file(Sampler::Random, &p).is_err());
    }

    fn simplex(c: usize) -> impl Strategy<Value = ProbVector> {
        prop::collection::vec(0.0f64..1.0, c).prop_filter_map("degenerate", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| ProbVector::new_unchecked(w.iter().map(|x| x / s).collect()))
        })
    }

    proptest! {
        #[test]
        fn rankedms_bounds_and_dominance(p in (2usize..12).prop_flat_map(simplex)) {
            let phi = score_rankedms(&p);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&phi));
            prop_assert!(phi >= score_margin(&p) - 1e-15);
        }

        #[test]
        fn scorers_permutation_invariant(p in (2usize..8).prop_flat_map(simplex), seed in any::<u64>()) {
            let mut q = p.as_slice().to_vec();
            RngStream::new(seed, Purpose::Shuffle).shuffle(&mut q);
            let q = ProbVector::new_unchecked(q);
            prop_assert_eq!(score_rankedms(&p), score_rankedms(&q));
            prop_assert_eq!(score_margin(&p), score_margin(&q));
            prop_assert_eq!(score_least_confidence(&p), score_least_confidence(&q));
            prop_assert!((score_entropy(&p) - score_entropy(&q)).abs() < 1e-12);
        }

        #[test]
        fn selection_keeps_pool_consistent(total in 2usize..60, seed in any::<u64>(), frac in 0.0f64..1.0) {
            let mut rng = RngStream::new(seed, Purpose::SelectTiebreak);
            let start = ((total as f64 * frac) as usize).clamp(1, total - 1);
            let pool = crate::data::init_pool(total, start, &mut rng).unwrap();
            let b = rng.below(pool.unlabeled().len() + 1);
            let cands: Vec<ScoredCandidate> = pool
                .unlabeled_indices()
                .into_iter()
                .map(|i| ScoredCandidate::new(i, rng.uniform()).unwrap())
                .collect();
            let sel = select_batch(&cands, b, Direction::Smallest).unwrap();
            let next = apply_selection(&pool, &sel).unwrap();
            prop_assert!(next.check_invariants().is_ok());
            prop_assert_eq!(next.labeled().len(), pool.labeled().len() + b);
        }
    }
}
