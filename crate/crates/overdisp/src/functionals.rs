//! Integral functionals of the model and the scaled log-mgf.
//!
//! Everything here reduces to the three families
//!
//!   z⁺ₖ       = ∫₀¹ F̄(s)ᵏ ds
//!   z⁻ₖ(τ)    = ∫₀¹ β⁽ᵏ⁾(τ F̄(s)) F̄(s)ᵏ ds,   k ∈ {0, 1, 2}
//!   Z(τ)      = (μ/τ) ∫₀¹ r F̄(s) / (μ − τ F̄(s))² ds   (gamma subordinator)
//!
//! plus the scaled log-mgf of the job count,
//!
//!   γₙ(θ)  = φₙ z⁻₀(ψₙ α(θ)),      α(θ) = eᶿ − 1,
//!   γₙ'(θ) = n eᶿ z⁻₁(ψₙ α(θ)),
//!   γₙ''(θ)= n ψₙ e²ᶿ z⁻₂(ψₙ α(θ)) + n eᶿ z⁻₁(ψₙ α(θ)).
//!
//! Built-in service/subordinator pairs use closed forms; adaptive quadrature
//! with panels split at tail jumps covers the rest and doubles as the
//! cross-check oracle in the tests.

use crate::error::{Error, Result};
use crate::model::{Model, Service, Subordinator};
use crate::quad::{self, QuadratureConfig};
use crate::special;

/// Relative size of |τ|/rate below which z⁻₂ switches from the closed form
/// (which subtracts two O(1/τ) quantities) to a short power series.
const SERIES_SWITCH: f64 = 1e-3;

/// z⁺ₖ = ∫₀¹ F̄(s)ᵏ ds with the default quadrature settings.
pub fn z_plus(k: u32, service: &Service) -> Result<f64> {
    z_plus_with(k, service, &QuadratureConfig::default())
}

pub fn z_plus_with(k: u32, service: &Service, cfg: &QuadratureConfig) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("z_plus needs k >= 1".into()));
    }
    match service {
        Service::Deterministic { d } => Ok(d.min(1.0)),
        Service::Exponential { nu } => {
            let nk = nu * f64::from(k);
            Ok((-(-nk).exp_m1()) / nk)
        }
        Service::PowerLaw { kappa } => {
            let m = 2 * k - 1;
            Ok((1.0 - (1.0 + kappa).powi(-(m as i32))) / (f64::from(m) * kappa))
        }
        Service::CustomTail(_) => quad::integrate_with_splits(
            |s| service.tail(s).powi(k as i32),
            0.0,
            1.0,
            &service.discontinuities(),
            cfg,
        ),
    }
}

/// z⁻ₖ(τ) for k ∈ {0, 1, 2} with the default quadrature settings.
pub fn z_minus(k: u32, tau: f64, model: &Model) -> Result<f64> {
    z_minus_with(k, tau, model, &QuadratureConfig::default())
}

pub fn z_minus_with(k: u32, tau: f64, model: &Model, cfg: &QuadratureConfig) -> Result<f64> {
    if k > 2 {
        return Err(Error::Domain("z_minus supports k in {0, 1, 2} only".into()));
    }
    check_tilt(tau, model)?;
    if let Subordinator::Gamma { shape, rate } = *model.subordinator() {
        match model.service() {
            Service::Deterministic { d } => {
                let width = d.min(1.0);
                return Ok(width * model.subordinator().exponent(k, tau)?);
            }
            Service::Exponential { nu } => return gamma_exp_z_minus(k, tau, shape, rate, *nu),
            Service::PowerLaw { kappa } => {
                if let Some(v) = gamma_power_law_z_minus(k, tau, shape, rate, *kappa) {
                    return Ok(v);
                }
            }
            Service::CustomTail(_) => {}
        }
    }
    z_minus_quadrature(k, tau, model, cfg)
}

fn check_tilt(tau: f64, model: &Model) -> Result<()> {
    let sup = model.service().tail_sup();
    let dom = model.subordinator().theta_dom();
    if tau * sup >= dom {
        return Err(Error::Domain(format!(
            "tilt {tau} pushes the exponent argument to {} >= theta_dom = {dom}",
            tau * sup
        )));
    }
    Ok(())
}

fn z_minus_quadrature(k: u32, tau: f64, model: &Model, cfg: &QuadratureConfig) -> Result<f64> {
    let service = model.service();
    let sub = model.subordinator();
    quad::integrate_with_splits(
        |s| {
            let fb = service.tail(s);
            sub.exponent(k, tau * fb).unwrap_or(f64::NAN) * fb.powi(k as i32)
        },
        0.0,
        1.0,
        &service.discontinuities(),
        cfg,
    )
}

/// Closed forms for the gamma subordinator with exponential service.
fn gamma_exp_z_minus(k: u32, tau: f64, shape: f64, rate: f64, nu: f64) -> Result<f64> {
    if tau == 0.0 || (k == 2 && tau.abs() < SERIES_SWITCH * rate) {
        return z_minus_small_tau(k, tau, shape, rate, &Service::Exponential { nu });
    }
    Ok(match k {
        0 => {
            // (r/ν)(Li₂(τ/μ) − Li₂(τ e^{-ν}/μ))
            shape / nu * (special::li2(tau / rate) - special::li2(tau * (-nu).exp() / rate))
        }
        1 => {
            // (r/(ντ)) log((μ − τe^{-ν})/(μ − τ)), written via log1p.
            let spread = -(-nu).exp_m1(); // 1 - e^{-ν}
            shape / (nu * tau) * (tau * spread / (rate - tau)).ln_1p()
        }
        _ => {
            // z⁻₂ = −z⁻₁/τ + Z with both pieces in closed form.
            let z1 = gamma_exp_z_minus(1, tau, shape, rate, nu)?;
            -z1 / tau + gamma_exp_z_cap(tau, shape, rate, nu)
        }
    })
}

fn gamma_exp_z_cap(tau: f64, shape: f64, rate: f64, nu: f64) -> f64 {
    // (μr/(ντ²))(1/(μ−τ) − 1/(μ−τe^{-ν})), with the difference taken
    // algebraically so nothing cancels for small τ.
    let e = (-nu).exp();
    rate * shape * (1.0 - e) / (nu * tau * (rate - tau) * (rate - tau * e))
}

/// Closed forms for the gamma subordinator with the power-law tail; `None`
/// falls back to quadrature (negative tilts).
fn gamma_power_law_z_minus(k: u32, tau: f64, shape: f64, rate: f64, kappa: f64) -> Option<f64> {
    if tau == 0.0 || (k == 2 && tau.abs() < SERIES_SWITCH * rate) {
        return z_minus_small_tau(k, tau, shape, rate, &Service::PowerLaw { kappa }).ok();
    }
    if tau < 0.0 {
        return None;
    }
    Some(match k {
        0 => {
            // (r/κ)[log(1 − τ/μ) − (κ+1) log(1 − (τ/μ)/(κ+1)²)] + 2τ z⁻₁(τ)
            let q = tau / rate;
            let z1 = gamma_power_law_z_minus(1, tau, shape, rate, kappa)?;
            shape / kappa * ((-q).ln_1p() - (kappa + 1.0) * (-q / (kappa + 1.0).powi(2)).ln_1p())
                + 2.0 * tau * z1
        }
        1 => {
            // (r/(κ√(μτ)))[atanh(x) − atanh(x/(κ+1))], x = √(τ/μ)
            let x = (tau / rate).sqrt();
            shape / (kappa * (rate * tau).sqrt()) * (x.atanh() - (x / (kappa + 1.0)).atanh())
        }
        _ => {
            let z1 = gamma_power_law_z_minus(1, tau, shape, rate, kappa)?;
            -z1 / tau + gamma_power_law_z_cap(tau, shape, rate, kappa, z1)
        }
    })
}

fn gamma_power_law_z_cap(tau: f64, shape: f64, rate: f64, kappa: f64, z1: f64) -> f64 {
    let kp1 = kappa + 1.0;
    z1 / (2.0 * tau)
        + shape / (2.0 * kappa * tau) * (1.0 / (rate - tau) - kp1 / (rate * kp1 * kp1 - tau))
}

/// Power series z⁻ₖ(τ) = β⁽ᵏ⁾-Taylor ⊗ z⁺: exact limits at τ = 0 and the
/// well-conditioned route for |τ| ≪ rate, where the closed z⁻₂ form would
/// subtract two nearly equal O(1/τ) terms.
fn z_minus_small_tau(k: u32, tau: f64, shape: f64, rate: f64, service: &Service) -> Result<f64> {
    // β⁽ᵏ⁾(θ) for the gamma exponent has Taylor coefficients
    // β⁽ᵏ⁾(θ) = r Σ_j ((j+k-1)!/j!) θʲ / μ^{j+k}  (k ≥ 1), so
    // z⁻ₖ(τ) = (r/μᵏ) Σ_j c_{j,k} (τ/μ)ʲ z⁺_{j+k}, with c_{j,0} = 1/(j) style
    // handled separately below.
    let q = tau / rate;
    let mut sum = 0.0;
    for j in 0..60_u32 {
        let term = match k {
            0 => {
                if j == 0 {
                    continue;
                }
                // β(θ) = r Σ_{j≥1} θʲ/(j μʲ)
                q.powi(j as i32) / f64::from(j) * z_plus(j, service)?
            }
            1 => q.powi(j as i32) * z_plus(j + 1, service)?,
            _ => f64::from(j + 1) * q.powi(j as i32) * z_plus(j + 2, service)?,
        };
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && j > 2 {
            break;
        }
    }
    let scale = match k {
        0 => shape,
        1 => shape / rate,
        _ => shape / (rate * rate),
    };
    Ok(scale * sum)
}

/// Z(τ) = (μ/τ) ∫₀¹ r F̄(s)/(μ − τ F̄(s))² ds, gamma subordinator only.
///
/// Satisfies z⁻₂(τ) = −z⁻₁(τ)/τ + Z(τ).
pub fn z_cap(tau: f64, model: &Model) -> Result<f64> {
    z_cap_with(tau, model, &QuadratureConfig::default())
}

pub fn z_cap_with(tau: f64, model: &Model, cfg: &QuadratureConfig) -> Result<f64> {
    let Subordinator::Gamma { shape, rate } = *model.subordinator() else {
        return Err(Error::Unsupported("Z(tau) is defined for the gamma subordinator only".into()));
    };
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("Z(tau) needs tau > 0, got {tau}")));
    }
    check_tilt(tau, model)?;
    match model.service() {
        Service::Deterministic { d } => {
            let width = d.min(1.0);
            Ok(rate / tau * shape * width / ((rate - tau) * (rate - tau)))
        }
        Service::Exponential { nu } => Ok(gamma_exp_z_cap(tau, shape, rate, *nu)),
        Service::PowerLaw { kappa } => {
            let z1 = gamma_power_law_z_minus(1, tau, shape, rate, *kappa)
                .expect("positive tau has a closed form");
            Ok(gamma_power_law_z_cap(tau, shape, rate, *kappa, z1))
        }
        Service::CustomTail(_) => {
            let service = model.service();
            let v = quad::integrate_with_splits(
                |s| {
                    let fb = service.tail(s);
                    let den = rate - tau * fb;
                    shape * fb / (den * den)
                },
                0.0,
                1.0,
                &service.discontinuities(),
                cfg,
            )?;
            Ok(rate / tau * v)
        }
    }
}

/// Li₂(x) for x ≤ 1.
pub fn dilog(x: f64) -> Result<f64> {
    if x > 1.0 {
        return Err(Error::Domain(format!("dilog is real only for x <= 1, got {x}")));
    }
    Ok(special::li2(x))
}

/// The scaled log-mgf γₙ of the job count and its first two derivatives:
/// `order` 0 → γₙ(θ), 1 → γₙ'(θ), 2 → γₙ''(θ).
pub fn lmgf_n(theta: f64, model: &Model, order: u32) -> Result<f64> {
    lmgf_n_with(theta, model, order, &QuadratureConfig::default())
}

pub fn lmgf_n_with(
    theta: f64,
    model: &Model,
    order: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if order > 2 {
        return Err(Error::Domain("lmgf_n supports orders 0, 1, 2".into()));
    }
    let scaling = model.scaling();
    let n = scaling.n as f64;
    let psi = scaling.psi();
    let alpha = theta.exp_m1();
    let tau = psi * alpha;
    match order {
        0 => Ok(scaling.phi() * z_minus_with(0, tau, model, cfg)?),
        1 => Ok(n * theta.exp() * z_minus_with(1, tau, model, cfg)?),
        _ => {
            let e = theta.exp();
            Ok(n * psi * e * e * z_minus_with(2, tau, model, cfg)?
                + n * e * z_minus_with(1, tau, model, cfg)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthExponent, ModelSpec, Scaling, TailFn};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn model(service: Service, u: f64, f: GrowthExponent, n: u64) -> Model {
        ModelSpec {
            subordinator: Subordinator::Gamma { shape: 1.0, rate: 1.0 },
            service,
            u,
            scaling: Scaling::new(n, f),
        }
        .validate()
        .unwrap()
    }

    fn det_model() -> Model {
        model(Service::Deterministic { d: 0.5 }, 1.0, GrowthExponent::Value(1.0), 50)
    }

    fn exp_model(nu: f64) -> Model {
        model(Service::Exponential { nu }, 1.0, GrowthExponent::Value(1.0), 50)
    }

    fn pl_model(kappa: f64) -> Model {
        model(Service::PowerLaw { kappa }, 1.0, GrowthExponent::Value(1.0), 50)
    }

    #[test]
    fn z_plus_closed_forms() {
        let det = Service::Deterministic { d: 0.5 };
        assert_eq!(z_plus(1, &det).unwrap(), 0.5);
        assert_eq!(z_plus(2, &det).unwrap(), 0.5);

        let exp2 = Service::Exponential { nu: 2.0 };
        assert!((z_plus(1, &exp2).unwrap() - 0.432_332_358_381_693_65).abs() < 1e-15);

        let pl2 = Service::PowerLaw { kappa: 2.0 };
        assert!((z_plus(2, &pl2).unwrap() - 13.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn z_plus_closed_vs_quadrature() {
        // Dual route: wrap each built-in tail as a custom evaluator so the
        // quadrature path is exercised against the closed forms.
        let builtins: Vec<Service> = vec![
            Service::Deterministic { d: 0.5 },
            Service::Exponential { nu: 2.0 },
            Service::Exponential { nu: 1.594 },
            Service::PowerLaw { kappa: 1.0 },
            Service::PowerLaw { kappa: 2.0 },
        ];
        for svc in builtins {
            for k in 1..=4 {
                let closed = z_plus(k, &svc).unwrap();
                let wrapped = match &svc {
                    Service::Deterministic { d } => {
                        let d = *d;
                        Service::CustomTail(Arc::new(TailFn {
                            tail: Box::new(move |s| if s < d { 1.0 } else { 0.0 }),
                        }))
                    }
                    Service::Exponential { nu } => {
                        let nu = *nu;
                        Service::CustomTail(Arc::new(TailFn {
                            tail: Box::new(move |s| (-nu * s).exp()),
                        }))
                    }
                    Service::PowerLaw { kappa } => {
                        let kappa = *kappa;
                        Service::CustomTail(Arc::new(TailFn {
                            tail: Box::new(move |s| (1.0 + kappa * s).powi(-2)),
                        }))
                    }
                    Service::CustomTail(_) => unreachable!(),
                };
                // The jump location is not discoverable from a black-box tail;
                // pass it via the quadrature splits by probing the wrapped
                // service through the deterministic original.
                let quadv = match &svc {
                    Service::Deterministic { d } => quad::integrate_with_splits(
                        |s| wrapped.tail(s).powi(k as i32),
                        0.0,
                        1.0,
                        &[*d],
                        &QuadratureConfig::default(),
                    )
                    .unwrap(),
                    _ => z_plus(k, &wrapped).unwrap(),
                };
                let rel = (closed - quadv).abs() / quadv.abs().max(1e-300);
                assert!(rel <= 1e-8, "z_plus k={k} {svc:?}: closed {closed} vs quad {quadv}");
            }
        }
    }

    #[test]
    fn z_minus_det_examples() {
        let m = det_model();
        assert!((z_minus(1, 0.5, &m).unwrap() - 1.0).abs() < 1e-14);
        assert!((z_minus(2, 0.5, &m).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(z_minus(0, 0.0, &m).unwrap(), 0.0);
        assert_eq!(z_minus(0, 0.0, &exp_model(2.0)).unwrap(), 0.0);
        assert_eq!(z_minus(0, 0.0, &pl_model(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn z_minus_frozen_reference_values() {
        // 40-digit quadrature references.
        let me = exp_model(2.0);
        assert!((z_minus(1, 0.5, &me).unwrap() - 0.623_081_260_399_663_9).abs() < 1e-12);
        assert!((z_minus(0, 0.5, &me).unwrap() - 0.256_696_180_172_599_55).abs() < 1e-12);
        let mp = pl_model(2.0);
        assert!((z_minus(0, 0.5, &mp).unwrap() - 0.192_529_036_154_484_87).abs() < 1e-12);
        assert!((z_minus(1, 0.5, &mp).unwrap() - 0.453_365_005_674_534_61).abs() < 1e-12);
        assert!((z_minus(2, 0.5, &mp).unwrap() - 0.370_164_406_090_171_27).abs() < 1e-12);
    }

    #[test]
    fn z_minus_closed_vs_quadrature_grid() {
        let cfg = QuadratureConfig::default();
        for m in [exp_model(2.0), exp_model(1.594), pl_model(1.0), pl_model(2.0)] {
            for i in 1..=20 {
                let tau = 0.95 * f64::from(i) / 20.0;
                for k in 0..=2 {
                    let closed = z_minus(k, tau, &m).unwrap();
                    let quadv = z_minus_quadrature(k, tau, &m, &cfg).unwrap();
                    let rel = (closed - quadv).abs() / quadv.abs().max(1e-300);
                    assert!(
                        rel <= 1e-8,
                        "k={k} tau={tau} {:?}: closed {closed} vs quad {quadv} (rel {rel:e})",
                        m.service()
                    );
                }
            }
        }
    }

    #[test]
    fn z_minus_negative_tilt_agrees_with_quadrature() {
        let cfg = QuadratureConfig::default();
        for m in [exp_model(2.0), pl_model(2.0)] {
            for &tau in &[-0.4, -1.7] {
                let got = z_minus(1, tau, &m).unwrap();
                let quadv = z_minus_quadrature(1, tau, &m, &cfg).unwrap();
                assert!((got - quadv).abs() <= 1e-9 * quadv.abs().max(1.0));
            }
        }
    }

    #[test]
    fn z_minus_small_tau_is_well_conditioned() {
        let cfg = QuadratureConfig { abs_tol: 1e-15, rel_tol: 1e-13, max_subdivisions: 400 };
        for m in [exp_model(2.0), pl_model(2.0)] {
            for &tau in &[1e-4, 1e-6, 1e-9] {
                let got = z_minus(2, tau, &m).unwrap();
                let quadv = z_minus_quadrature(2, tau, &m, &cfg).unwrap();
                let rel = (got - quadv).abs() / quadv.abs();
                assert!(rel <= 1e-10, "tau={tau}: {got} vs {quadv} (rel {rel:e})");
            }
        }
    }

    #[test]
    fn z_minus_rejects_tilt_outside_domain() {
        let m = det_model();
        assert!(matches!(z_minus(1, 1.0, &m).unwrap_err(), Error::Domain(_)));
        assert!(matches!(z_minus(1, 5.0, &m).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn z_cap_det_example() {
        let m = det_model();
        let got = z_cap(1.0 / 3.0, &m).unwrap();
        assert!((got - 27.0 / 8.0).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn z_cap_identity_on_grid() {
        // z⁻₂(τ) = −z⁻₁(τ)/τ + Z(τ)
        for m in [det_model(), exp_model(2.0), pl_model(2.0), exp_model(1.594), pl_model(1.0)] {
            for i in 1..=20 {
                let tau = 0.93 * f64::from(i) / 20.0;
                let lhs = z_minus(2, tau, &m).unwrap();
                let rhs = -z_minus(1, tau, &m).unwrap() / tau + z_cap(tau, &m).unwrap();
                let rel = (lhs - rhs).abs() / lhs.abs().max(1e-300);
                assert!(rel <= 1e-8, "tau={tau} {:?}: {lhs} vs {rhs}", m.service());
            }
        }
    }

    #[test]
    fn z_cap_needs_gamma_subordinator() {
        let spec = ModelSpec {
            subordinator: Subordinator::Custom(Arc::new(crate::model::CustomExponent {
                exponent: Box::new(|t| -(-t).ln_1p()),
                d1: Box::new(|t| 1.0 / (1.0 - t)),
                d2: Box::new(|t| 1.0 / ((1.0 - t) * (1.0 - t))),
                theta_dom: 1.0,
                non_lattice: true,
            })),
            service: Service::Deterministic { d: 0.5 },
            u: 1.0,
            scaling: Scaling::new(10, GrowthExponent::Value(1.0)),
        };
        let m = spec.validate().unwrap();
        assert!(matches!(z_cap(0.3, &m).unwrap_err(), Error::Unsupported(_)));
        // but z_minus works through the callbacks and matches the gamma model
        let got = z_minus(1, 0.5, &m).unwrap();
        assert!((got - 1.0).abs() < 1e-9, "custom exponent path: {got}");
    }

    #[test]
    fn dilog_examples_and_domain() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        let pi = std::f64::consts::PI;
        assert!((dilog(1.0).unwrap() - pi * pi / 6.0).abs() < 1e-14);
        let want = pi * pi / 12.0 - 0.5 * (2.0_f64).ln().powi(2);
        assert!((dilog(0.5).unwrap() - want).abs() < 1e-14);
        assert!(matches!(dilog(1.1).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn lmgf_examples() {
        let m = det_model(); // f = 1, n = 50
        assert_eq!(lmgf_n(0.0, &m, 0).unwrap(), 0.0);
        let d1 = lmgf_n(0.0, &m, 1).unwrap();
        assert!((d1 - 25.0).abs() < 1e-12, "gamma_n'(0) = nc: got {d1}");

        // The balanced twist for this model solves e^t z⁻₁(e^t − 1) = u with
        // the closed-form answer log(4/3); the tilted mean is then n·u.
        let theta0 = (4.0_f64 / 3.0).ln();
        let want = 50.0;
        let got = lmgf_n(theta0, &m, 1).unwrap();
        assert!((got - want).abs() < 1e-10, "tilted mean: got {got}");
    }

    #[test]
    fn lmgf_is_convex_and_consistent_with_finite_differences() {
        let h = 1e-5;
        for m in [det_model(), exp_model(2.0), pl_model(2.0)] {
            for i in 0..10 {
                let theta = 0.05 + 0.25 * f64::from(i) / 10.0;
                let d2 = lmgf_n(theta, &m, 2).unwrap();
                assert!(d2 > 0.0, "gamma_n'' must be positive at {theta}");
                let d1 = lmgf_n(theta, &m, 1).unwrap();
                let fd =
                    (lmgf_n(theta + h, &m, 0).unwrap() - lmgf_n(theta - h, &m, 0).unwrap()) / (2.0 * h);
                let rel = (d1 - fd).abs() / d1.abs().max(1.0);
                assert!(rel <= 1e-5, "order-1 vs finite difference at {theta}: rel {rel:e}");
            }
        }
    }

    #[test]
    fn lmgf_rejects_tilt_that_exits_domain() {
        let m = det_model();
        // psi = 1, alpha(theta) >= 1 at theta = ln 2 hits theta_dom = 1.
        assert!(matches!(lmgf_n(0.8, &m, 1).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn mean_load_invariant_under_custom_wrapping() {
        let base = exp_model(2.0);
        let wrapped = ModelSpec {
            subordinator: Subordinator::Gamma { shape: 1.0, rate: 1.0 },
            service: Service::CustomTail(Arc::new(TailFn {
                tail: Box::new(|s| (-2.0 * s).exp()),
            })),
            u: 1.0,
            scaling: Scaling::new(50, GrowthExponent::Value(1.0)),
        }
        .validate()
        .unwrap();
        let rel = (base.mean_load() - wrapped.mean_load()).abs() / base.mean_load();
        assert!(rel <= 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn zzzz_identity_random(kappa in 0.4_f64..4.0, frac in 0.02_f64..0.95) {
            let m = pl_model(kappa);
            let tau = frac; // rate = 1
            let lhs = z_minus(2, tau, &m).unwrap();
            let rhs = -z_minus(1, tau, &m).unwrap() / tau + z_cap(tau, &m).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1e-12));
        }

        #[test]
        fn exp_closed_forms_random(nu in 0.3_f64..4.0, frac in 0.02_f64..0.95) {
            let m = exp_model(nu);
            let cfg = QuadratureConfig::default();
            for k in 0..=2 {
                let closed = z_minus(k, frac, &m).unwrap();
                let quadv = z_minus_quadrature(k, frac, &m, &cfg).unwrap();
                prop_assert!((closed - quadv).abs() <= 1e-8 * quadv.abs().max(1e-12));
            }
        }
    }
}
