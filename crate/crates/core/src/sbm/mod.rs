//! Stochastic block model generation and the shared parameter arithmetic.

pub mod config;
pub mod generate;
pub mod graph;
pub mod io;
pub mod logit;
pub mod matrix;

pub use config::{AssignmentMode, SbmConfig};
pub use generate::generate_sbm;
pub use graph::Graph;
pub use logit::{clamp_probability, logit_constants, LogitConstants, PROB_EPS};
pub use matrix::{Backend, BinaryMatrix};
