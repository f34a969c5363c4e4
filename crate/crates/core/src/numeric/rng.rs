//! Reproducible random streams keyed by `(seed, purpose)`.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// What a stream is used for. Each tag is mixed into the seed so that
/// consumers never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Init,
    Shuffle,
    Beta,
    SelectTiebreak,
    DataGen,
    TestSplit,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Init => 0x1,
            Purpose::Shuffle => 0x2,
            Purpose::Beta => 0x3,
            Purpose::SelectTiebreak => 0x4,
            Purpose::DataGen => 0x5,
            Purpose::TestSplit => 0x6,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A single-owner ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    purpose: Purpose,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        Self::with_substream(seed, purpose, 0)
    }

    /// An independent stream for, e.g., one cycle of a trial.
    pub fn with_substream(seed: u64, purpose: Purpose, substream: u64) -> Self {
        let key = splitmix64(seed ^ splitmix64(purpose.tag()));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(substream);
        Self { seed, purpose, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `(0, 1)`; never returns zero, so `ln` is always finite.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Shuffles `0..n` and pairs adjacent entries. With odd `n` the last
/// shuffled index is left out.
pub fn shuffled_pairs(n: usize, rng: &mut RngStream) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(invalid(format!("shuffled_pairs needs n >= 2, got {n}")));
    }
    let perm = rng.permutation(n);
    Ok(perm.chunks_exact(2).map(|p| (p[0], p[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_and_purpose_repeat() {
        let mut a = RngStream::new(42, Purpose::Beta);
        let mut b = RngStream::new(42, Purpose::Beta);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn purposes_and_substreams_diverge() {
        let mut a = RngStream::new(42, Purpose::Beta);
        let mut b = RngStream::new(42, Purpose::Shuffle);
        let mut c = RngStream::with_substream(42, Purpose::Beta, 1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_ne!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn two_indices_form_one_pair() {
        let mut rng = RngStream::new(1, Purpose::Shuffle);
        let pairs = shuffled_pairs(2, &mut rng).unwrap();
        assert_eq!(pairs.len(), 1);
        let (a, b) = pairs[0];
        assert_eq!((a.min(b), a.max(b)), (0, 1));
    }

    #[test]
    fn odd_count_leaves_one_out() {
        let mut rng = RngStream::new(1, Purpose::Shuffle);
        let pairs = shuffled_pairs(5, &mut rng).unwrap();
        assert_eq!(pairs.len(), 2);
        let mut seen: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn seeds_change_pairing() {
        let a = shuffled_pairs(100, &mut RngStream::new(1, Purpose::Shuffle)).unwrap();
        let b = shuffled_pairs(100, &mut RngStream::new(2, Purpose::Shuffle)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn too_few_rejected() {
        assert!(shuffled_pairs(1, &mut RngStream::new(0, Purpose::Shuffle)).is_err());
        assert!(shuffled_pairs(0, &mut RngStream::new(0, Purpose::Shuffle)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn pairs_are_disjoint(n in 2usize..300, seed in any::<u64>()) {
            let pairs = shuffled_pairs(n, &mut RngStream::new(seed, Purpose::Shuffle)).unwrap();
            prop_assert_eq!(pairs.len(), n / 2);
            let mut seen = vec![false; n];
            for (a, b) in pairs {
                prop_assert!(a < n && b < n && a != b);
                prop_assert!(!seen[a] && !seen[b]);
                seen[a] = true;
                seen[b] = true;
            }
        }
    }
}
