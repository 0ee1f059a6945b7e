//! Comparison methods: mean-field BCAVI, spectral clustering and belief
//! propagation. All produce the same [`TrialRecord`](crate::metrics::TrialRecord)
//! shape as VIPS.

pub mod bp;
pub mod mfvi;
pub mod spectral;

pub use bp::{run_bp, BpConfig, BpInit, BpOutput};
pub use mfvi::{mfvi_sweep, mfvi_sweep_general, run_mfvi, run_mfvi_general, GeneralMfviConfig, MfviConfig};
pub use spectral::{kmeans, run_spectral, spectral_cluster, top_eigenvectors, top_eigenvectors_op, SpectralConfig, SpectralResult};
