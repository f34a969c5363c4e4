//! Numeric substrate: dense matrices, seeded random streams, Beta draws.

mod beta;
mod matrix;
mod rng;

pub use beta::sample_beta;
pub use matrix::Matrix;
pub use rng::{shuffled_pairs, Purpose, RngStream};
