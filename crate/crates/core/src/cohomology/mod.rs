//! Conjugacy between Stratonovich SDEs and random ODEs, and the power-law
//! cohomology pair.

mod conjugacy;
mod kappa;
mod power;

pub use conjugacy::{
    conjugated_cocycle, conjugated_field, kappa_noise_bound, strong_error_against,
    verify_conjugacy, write_kappa_csv, ConjugacyTransform, ConjugatedNrds, ConvergenceReport,
    ConvergenceRow, KappaBoundRow,
};
pub use kappa::KappaSpec;
pub use power::{power_pair_residuals, PowerCohomology, PowerResiduals};
