//! Exponential-twist equations and the expansion constants of each regime.
//!
//! The change of measure tilts the job count so that the rare level u·n
//! becomes the tilted mean. Solving the first-order condition γₙ'(θ) = u·n
//! exactly gives the finite-n twist θₙ; letting n → ∞ in the three scaling
//! regimes produces the limit constants gathered here:
//!
//! * fast (φₙ superlinear): θ* = log(u/c) with correction slope v₁ and
//!   exponent coefficient v̄₂; decay rate χ⁺ per unit n; tilted variance u·n.
//! * slow (φₙ sublinear): τ* solves z⁻₁(τ) = u; exponent coefficient w̄₁,
//!   twist correction w₂, decay χ⁻ per unit φₙ, tilted variance z⁻₂(τ*)·nψₙ.
//! * balanced (φₙ = n): θ° solves eᶿ z⁻₁(eᶿ − 1) = u; decay χ° per unit n.
//!
//! All scalar equations are strictly monotone on the admissible interval, so
//! a bracketed Brent solve inside the exponent domain cannot miss the root.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{lmgf_n, z_cap, z_minus, z_plus};
use crate::model::Model;
pub use crate::roots::RootConfig;
use crate::roots::brent;

/// Margin keeping brackets strictly inside the exponent domain.
const DOMAIN_MARGIN: f64 = 1e-12;

/// Fast-regime constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FastConstants {
    /// Limit twist θ* = log(u/c).
    pub theta_star: f64,
    /// First-order twist correction: θₙ ≈ θ* + v₁ψₙ.
    pub v1: f64,
    /// Exponent coefficient of the φₙψₙ² correction term.
    pub vbar2: f64,
    /// Exponential decay rate per unit n: χ⁺ = u − c − u log(u/c) < 0.
    pub chi_plus: f64,
    /// Tilted variance per unit n; equals u.
    pub sigma_plus_sq: f64,
}

/// Slow-regime constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlowConstants {
    /// Limit of ψₙθₙ: the root of z⁻₁(τ) = u.
    pub tau_star: f64,
    /// Second-order twist correction: ψₙθₙ ≈ τ* + w₂/ψₙ.
    pub w2: f64,
    /// Exponent coefficient of the φₙ/ψₙ correction term: τ*²u/2.
    pub wbar1: f64,
    /// Exponential decay rate per unit φₙ: χ⁻ = z⁻₀(τ*) − τ*u < 0.
    pub chi_minus: f64,
    /// Tilted variance per unit nψₙ: z⁻₂(τ*).
    pub sigma_minus_sq: f64,
}

/// Balanced-regime constants (φₙ = n).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BalancedConstants {
    /// Twist θ°, independent of n.
    pub theta_circ: f64,
    /// Exponential decay rate per unit n: χ° = z⁻₀(e^{θ°} − 1) − θ°u < 0.
    pub chi_circ: f64,
    /// Tilted variance per unit n.
    pub sigma_circ_sq: f64,
}

/// Fast-regime constants in closed form.
pub fn fast_constants(model: &Model) -> Result<FastConstants> {
    let u = model.u();
    let c = model.mean_load();
    let b = model.mean_rate();
    let bpp0 = model.subordinator().exponent(2, 0.0)?;
    let z1 = z_plus(1, model.service())?;
    let z2 = z_plus(2, model.service())?;

    let ratio = u / c;
    let theta_star = ratio.ln();
    let v1 = -(ratio - 1.0) * (bpp0 / b) * (z2 / z1);
    let vbar2 = 0.5 * bpp0 * (ratio - 1.0) * (ratio - 1.0) * z2;
    let chi_plus = u - c - u * theta_star;
    Ok(FastConstants { theta_star, v1, vbar2, chi_plus, sigma_plus_sq: u })
}

/// Upper end of the admissible tilt interval: τ F̄(0) < θ_dom.
fn tau_limit(model: &Model) -> f64 {
    (1.0 - DOMAIN_MARGIN) * model.subordinator().theta_dom() / model.service().tail_sup()
}

/// Slow-regime constants; τ* is found by bracketed root finding.
pub fn slow_constants(model: &Model) -> Result<SlowConstants> {
    slow_constants_with(model, &RootConfig::default())
}

pub fn slow_constants_with(model: &Model, cfg: &RootConfig) -> Result<SlowConstants> {
    let u = model.u();
    let hi = tau_limit(model);
    let residual = |tau: f64| match z_minus(1, tau, model) {
        Ok(v) => v / u - 1.0,
        Err(_) => f64::NAN,
    };
    if !(residual(hi) > 0.0) {
        return Err(Error::Bracket(format!(
            "z_minus(1, tau) stays below u = {u} on the admissible interval (tau < {hi}); \
             the level is unreachable under the exponent domain"
        )));
    }
    let tau_star = brent(residual, 0.0, hi, cfg)?;

    let sigma_minus_sq = z_minus(2, tau_star, model)?;
    let w2 = -tau_star * u / sigma_minus_sq - 0.5 * tau_star * tau_star;
    let wbar1 = 0.5 * tau_star * tau_star * u;
    let chi_minus = z_minus(0, tau_star, model)? - tau_star * u;
    Ok(SlowConstants { tau_star, w2, wbar1, chi_minus, sigma_minus_sq })
}

/// Balanced-regime constants; θ° is found by bracketed root finding.
pub fn balanced_constants(model: &Model) -> Result<BalancedConstants> {
    balanced_constants_with(model, &RootConfig::default())
}

pub fn balanced_constants_with(model: &Model, cfg: &RootConfig) -> Result<BalancedConstants> {
    let u = model.u();
    let theta_hi = tau_limit(model).ln_1p();
    let residual = |theta: f64| match z_minus(1, theta.exp_m1(), model) {
        Ok(v) => theta.exp() * v / u - 1.0,
        Err(_) => f64::NAN,
    };
    if !(residual(theta_hi) > 0.0) {
        return Err(Error::Bracket(format!(
            "e^theta z_minus(1, e^theta - 1) stays below u = {u} on the admissible interval; \
             the level is unreachable under the exponent domain"
        )));
    }
    let theta_circ = brent(residual, 0.0, theta_hi, cfg)?;

    let tau = theta_circ.exp_m1();
    let chi_circ = z_minus(0, tau, model)? - theta_circ * u;
    let e2 = (2.0 * theta_circ).exp();
    let sigma_circ_sq = if model.subordinator().is_gamma() {
        -u / tau + e2 * z_cap(tau, model)?
    } else {
        e2 * z_minus(2, tau, model)? + u
    };
    Ok(BalancedConstants { theta_circ, chi_circ, sigma_circ_sq })
}

/// The finite-n twist: the unique positive root of γₙ'(θ) = u·n, solved in
/// the algebraic form eᶿ z⁻₁(ψₙ(eᶿ − 1)) = u.
pub fn solve_theta_n(model: &Model) -> Result<f64> {
    solve_theta_n_with(model, &RootConfig::default())
}

pub fn solve_theta_n_with(model: &Model, cfg: &RootConfig) -> Result<f64> {
    let u = model.u();
    let psi = model.scaling().psi();
    let theta_hi = (tau_limit(model) / psi).ln_1p();
    let residual = |theta: f64| match z_minus(1, psi * theta.exp_m1(), model) {
        Ok(v) => theta.exp() * v / u - 1.0,
        Err(_) => f64::NAN,
    };
    if !(residual(theta_hi) > 0.0) {
        return Err(Error::Bracket(format!(
            "gamma_n'(theta) stays below u n on the admissible interval (theta < {theta_hi}); \
             the level is unreachable under the exponent domain"
        )));
    }
    brent(residual, 0.0, theta_hi, cfg)
}

/// Tilted variance γₙ''(θ).
pub fn variance_q(model: &Model, theta: f64) -> Result<f64> {
    lmgf_n(theta, model, 2)
}

/// Convenience: all three regime constant sets for one model.
pub fn all_constants(model: &Model) -> Result<(FastConstants, BalancedConstants, SlowConstants)> {
    Ok((fast_constants(model)?, balanced_constants(model)?, slow_constants(model)?))
}
