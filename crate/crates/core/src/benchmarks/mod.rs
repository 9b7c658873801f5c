//! Seeded data generators for the benchmark systems, plus the reference
//! solutions used to check EDMD output against them.
//!
//! Every generator draws trajectory `i` from its own ChaCha stream keyed by
//! `(seed, i)`, so outputs do not depend on how work is scheduled.

mod appendix;
mod double_well;
mod duffing;
mod lti;
mod sde;
mod swiss;

pub use appendix::{appendix_check, appendix_matrices, AppendixReport};
pub use double_well::{
    double_well_convergence, double_well_dictionary, double_well_drift, double_well_fd_oracle, double_well_generate, double_well_potential, fd_operator, fd_spectrum,
    FdOperator, FdSpectrum, DOUBLE_WELL_DELTA_T,
};
pub use duffing::{
    classify_basins, duffing_basin_oracle, duffing_field, duffing_flow, duffing_generate, BasinLabel, BasinSplit,
    DuffingParams, DUFFING_SPIRAL_RATE,
};
pub use lti::{lti_generate, lti_map, lti_true_eigen, LtiEigenpair, LTI_MATRIX};
pub use sde::{reflect, trajectory_rng, SdeSpec};
pub use swiss::{swiss_embed, swiss_eigenfunction, swiss_roll_generate, swiss_true_eigenvalue, SWISS_DELTA_T};
