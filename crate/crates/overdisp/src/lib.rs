//! Tail asymptotics for an infinite-server system with overdispersed input.
//!
//! The arrival stream is a unit-rate Poisson process subordinated to a random
//! mass ∫ F̄ dB driven by an increasing Lévy process B (gamma by default), so
//! the job count N_n is mixed Poisson and markedly overdispersed. Under the
//! scaling φₙ = n^f, ψₙ = n^{1-f} this crate computes exact asymptotics of
//! the rare-event probability ξₙ(u) = P(N_n ≥ u·n) in the fast (f > 1),
//! balanced (f = 1), and slow (f < 1) timescale regimes, together with a
//! conditional Monte Carlo / importance-sampling oracle that cross-validates
//! the analytic approximations at finite n.
//!
//! Layering:
//!
//! * [`model`] — problem instance (subordinator, service tail, threshold,
//!   scaling) and validation;
//! * [`functionals`] — the integral functionals z⁺ₖ, z⁻ₖ, Z, the dilogarithm,
//!   and the scaled log-mgf γₙ with derivatives;
//! * [`twist`] — exponential change-of-measure equations and the regime
//!   constants;
//! * [`asymptotics`] — regime classification and the assembled ξₙ(u)
//!   approximations, plus a finite-n saddlepoint reference;
//! * [`mc`] — reproducible parallel Monte Carlo with exact conditional
//!   Poisson tails;
//! * [`cli`] — config parsing and report rendering for the `overdisp` binary.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod mc;
pub mod model;
pub mod quad;
pub mod roots;
mod special;
pub mod twist;

pub use error::{Error, Result};
pub use model::{GrowthExponent, Model, ModelSpec, Scaling, Service, Subordinator};
pub use quad::QuadratureConfig;
pub use roots::RootConfig;
