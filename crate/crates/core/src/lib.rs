//! Sharp Hardy and Rellich constants for the weighted operators
//! `H = −div(c ∇)` with `c(x) = |x|^δ (1+|x|)^{δ'−δ}`, together with the
//! numerical witnesses that check them.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agmon;
mod banded;
pub mod constants;
pub mod error;
pub mod form_calculus;
pub mod grushin;
pub mod quadrature;
pub mod radial;
pub mod weights;

pub use banded::{Ldl, SymBanded};
pub use constants::{rellich_constant, ConstantLedger, Regime};
pub use error::{Error, Result};
pub use radial::{ConvergenceReport, GridSpec, GridSummary, QuotientEstimate, QuotientKind, RadialGrid};
pub use weights::{Exponent, WeightParams, WeightProfile};
