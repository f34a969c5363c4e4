//! Pool-based active learning with overconfidence-aware training and
//! acquisition.
//!
//! Training uses cross-mixing: a mirrored pair of input interpolations
//! followed by a second interpolation of their hidden features at a chosen
//! layer, with soft labels composed from both coefficients. Acquisition uses
//! a rank-weighted sum of gaps between sorted class probabilities, picking
//! the least confident unlabeled samples. Baseline scorers, plain mixup,
//! calibration metrics and a multi-seed experiment harness come along.

pub mod cmam;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod sampling;

pub use error::{Error, Result};
pub use numeric::{Matrix, Purpose, RngStream};
