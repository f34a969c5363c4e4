use std::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::numeric::RngStream;

/// Disjoint labeled and unlabeled index sets over a pool of `total` rows.
///
/// The only mutation is [`PoolState::label`], which moves indices from the
/// unlabeled side to the labeled side and re-checks the invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    total: usize,
    labeled: BTreeSet<usize>,
    unlabeled: BTreeSet<usize>,
}

impl PoolState {
    /// A pool where `labeled` are known and every other index in `0..total`
    /// is unlabeled.
    pub fn new(total: usize, labeled: impl IntoIterator<Item = usize>) -> Result<Self> {
        let labeled: BTreeSet<usize> = labeled.into_iter().collect();
        if let Some(&i) = labeled.iter().next_back().filter(|&&i| i >= total) {
            return Err(Error::Pool(format!("index {i} outside pool of {total}")));
        }
        let unlabeled = (0..total).filter(|i| !labeled.contains(i)).collect();
        let pool = Self {
            total,
            labeled,
            unlabeled,
        };
        pool.check_invariants()?;
        Ok(pool)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn labeled(&self) -> &BTreeSet<usize> {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &BTreeSet<usize> {
        &self.unlabeled
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labeled.iter().copied().collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        self.unlabeled.iter().copied().collect()
    }

    /// Moves `selected` from unlabeled to labeled.
    pub fn label(&mut self, selected: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &i in selected {
            if !self.unlabeled.contains(&i) {
                return Err(Error::Pool(format!("index {i} is not in the unlabeled pool")));
            }
            if !seen.insert(i) {
                return Err(Error::Pool(format!("index {i} selected twice")));
            }
        }
        for &i in selected {
            self.unlabeled.remove(&i);
            self.labeled.insert(i);
        }
        self.check_invariants()
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.labeled.len() + self.unlabeled.len() != self.total {
            return Err(Error::Pool(format!(
                "{} labeled + {} unlabeled != {}",
                self.labeled.len(),
                self.unlabeled.len(),
                self.total
            )));
        }
        if let Some(i) = self.labeled.intersection(&self.unlabeled).next() {
            return Err(Error::Pool(format!("index {i} is both labeled and unlabeled")));
        }
        let max = self.labeled.iter().chain(&self.unlabeled).max();
        if let Some(&i) = max.filter(|&&i| i >= self.total) {
            return Err(Error::Pool(format!("index {i} outside pool of {}", self.total)));
        }
        Ok(())
    }
}

/// Labels a uniformly random `initial_budget`-subset of `0..n`: the prefix of
/// a seeded shuffle.
pub fn init_pool(n: usize, initial_budget: usize, rng: &mut RngStream) -> Result<PoolState> {
    if initial_budget == 0 || initial_budget > n {
        return Err(invalid(format!("initial budget {initial_budget} must be in 1..={n}")));
    }
    let perm = rng.permutation(n);
    PoolState::new(n, perm[..initial_budget].iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Purpose;

    fn rng() -> RngStream {
        RngStream::new(3, Purpose::Shuffle)
    }

    #[test]
    fn full_budget_exhausts_pool() {
        let p = init_pool(10, 10, &mut rng()).unwrap();
        assert!(p.unlabeled().is_empty());
        assert_eq!(p.labeled().len(), 10);
    }

    #[test]
    fn single_sample_budget() {
        let p = init_pool(10, 1, &mut rng()).unwrap();
        assert_eq!(p.labeled().len(), 1);
        assert_eq!(p.unlabeled().len(), 9);
    }

    #[test]
    fn same_seed_same_pool() {
        assert_eq!(
            init_pool(100, 20, &mut rng()).unwrap(),
            init_pool(100, 20, &mut rng()).unwrap()
        );
    }

    #[test]
    fn bad_budgets_rejected() {
        assert!(init_pool(10, 11, &mut rng()).is_err());
        assert!(init_pool(10, 0, &mut rng()).is_err());
    }

    #[test]
    fn label_rejects_foreign_and_duplicate_indices() {
        let mut p = PoolState::new(5, [0, 1]).unwrap();
        assert!(p.label(&[1]).is_err());
        assert!(p.label(&[2, 2]).is_err());
        assert!(p.label(&[9]).is_err());
        p.label(&[2, 4]).unwrap();
        assert_eq!(p.labeled_indices(), vec![0, 1, 2, 4]);
        assert_eq!(p.unlabeled_indices(), vec![3]);
    }

    #[test]
    fn construction_rejects_out_of_range() {
        assert!(PoolState::new(3, [3]).is_err());
    }
}
