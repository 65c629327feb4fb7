//! Radial reduction of the weighted forms, discretized with P1 elements on
//! `[r_min, r_max]` with Dirichlet conditions at both ends.
//!
//! Only radial functions are considered. For the Hardy quotient the radial
//! infimum is the full one; for Rellich the radial values are upper-bound
//! witnesses.

mod assembly;
mod convergence;
mod eigen;
mod grid;
mod trial;

pub use assembly::{assemble, assemble_weighted_mass, AssembledForms};
pub use convergence::{default_schedule, hardy_convergence, rellich_convergence, ConvergenceReport, GridSpec};
pub use eigen::{hardy_quotient_min, quotient_of, rellich_quotient_min, QuotientEstimate, QuotientKind, SolverOptions};
pub use grid::{GridSummary, RadialGrid, Spacing};
pub use trial::{side_constant, trial_alpha, trial_integrals, trial_jet, trial_quotient, Cutoff, Taper, TrialSide};

use crate::weights::WeightProfile;

/// `div(c χ) r² / c` for `χ = x|x|⁻²`, which is `d − 2 + ρ(r)`.
pub fn divergence_factor(profile: &WeightProfile, r: f64) -> f64 {
    profile.dim() as f64 - 2.0 + profile.rho(r)
}

/// `h(u) − 2λb‖c^{1/2}r⁻¹u‖² + λ²‖c^{1/2}r⁻¹u‖²` on interior nodal values.
///
/// Nonnegative for `λ = b = (d + δ∧δ' − 2)/2`, by completing the square.
pub fn completed_square(forms: &AssembledForms, u: &[f64], lambda: f64, b: f64) -> f64 {
    let h = forms.stiffness.quadratic(u);
    let w = forms.hardy_weight.quadratic(u);
    h - 2.0 * lambda * b * w + lambda * lambda * w
}
