//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by model validation, the analytic layer, and the simulator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The threshold `u` does not exceed the mean load `c`, so the event is not rare.
    #[error("rarity violated: u = {u} must exceed the mean load c = {c}")]
    RarityViolation { u: f64, c: f64 },

    /// A parameter or evaluation point left the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A service-time tail failed the validity checks.
    #[error("invalid service tail: {0}")]
    Tail(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// No sign change was found on the admissible interval of a scalar equation.
    #[error("bracketing failed: {0}")]
    Bracket(String),

    /// The requested expansion order has no available coefficients.
    #[error("unsupported expansion order m = {m} for f = {f}: coefficient {missing} is not available")]
    UnsupportedOrder { m: u32, f: f64, missing: &'static str },

    /// The operation is not defined for the given inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A run configuration could not be parsed or is inconsistent.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::UnsupportedOrder { .. } => 4,
            _ => 3,
        }
    }
}
