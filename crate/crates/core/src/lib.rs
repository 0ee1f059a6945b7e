//! Community detection in two-class and planted-partition stochastic
//! block models: pairwise-structured variational inference (VIPS), with
//! mean-field, spectral and belief-propagation baselines and a benchmark
//! harness.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod pairing;
pub mod sbm;
pub mod vips;

pub use error::{Error, Result};
