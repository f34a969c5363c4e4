//! Datasets and labeled/unlabeled pool bookkeeping.

mod csv_io;
mod generate;
mod pool;

pub use csv_io::{load_csv, write_csv};
pub(crate) use csv_io::{parse_real, read_rows};
pub use generate::{gen_blobs, gen_two_moons, make_imbalanced};
pub use pool::{init_pool, PoolState};

use crate::error::{invalid, Result};
use crate::numeric::Matrix;

/// Features with one integer label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(invalid(format!("need at least 2 classes, got {num_classes}")));
        }
        if labels.len() != features.rows() {
            return Err(invalid(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.rows()
            )));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(invalid(format!("label {l} at row {i} outside [0, {num_classes})")));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let features = self.features.select_rows(indices)?;
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(features, labels, self.num_classes)
    }

    /// One-hot targets for the rows at `indices`.
    pub fn one_hot(&self, indices: &[usize]) -> Result<Matrix> {
        let c = self.num_classes;
        Matrix::from_fn(
            indices.len(),
            c,
            |r, k| if self.labels[indices[r]] == k { 1.0 } else { 0.0 },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_labels() {
        let x = Matrix::zeros(2, 1).unwrap();
        assert!(Dataset::new(x.clone(), vec![0, 2], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0], 2).is_err());
        assert!(Dataset::new(x, vec![0, 0], 1).is_err());
    }
}
