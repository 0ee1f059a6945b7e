//! Variational inference with pairwise structure.

pub mod elbo;
pub mod engine;
pub mod general;
pub mod params;
pub mod state;
pub mod updates;

pub use elbo::{elbo, elbo_from_psi, elbo_grad_psi, elbo_grad_psi_at, kl_term, mean_field_elbo, PsiGradient};
pub use engine::{init_state, meta_iteration, run_vips, VipsCheckpoint, VipsConfig, VipsRun, TICKS_PER_META};
pub use general::{meta_iteration_general, run_vips_general, GeneralInit, GeneralVipsConfig, GeneralVipsState};
pub use params::{update_parameters, update_parameters_mean_field};
pub use state::{InitMode, VipsState, THETA_CLAMP};
pub use updates::{pair_diagonal_term, prior_logit, unbalanced_adjustment, update_theta01, update_theta10, update_theta11};
