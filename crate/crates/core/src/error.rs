use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow evaluating {0}")]
    Overflow(String),

    #[error("quadrature did not converge on element {element} (estimated error {error:e})")]
    Quadrature { element: usize, error: f64 },

    #[error("factorization broke down at row {row}")]
    Factorization { row: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("identity violated: {name} residual {residual:e} exceeds {tolerance:e}")]
    IdentityViolation {
        name: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("refinement step {step} failed: {source}")]
    Refinement { step: usize, source: Box<Error> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
