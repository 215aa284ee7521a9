//! Regime classification and the assembled tail approximations.
//!
//! For the scaled job count N_n, the tail probability ξₙ(u) = P(N_n ≥ u·n)
//! admits exact asymptotics whose shape depends on how the resampling
//! timescale φₙ = n^f compares with the Poisson clock:
//!
//! * fast, f > 1:   ξₙ ≈ (1−e^{−θ*})⁻¹ (σ₊√(2πn))⁻¹ exp(χ⁺n + v̄₂ φₙψₙ²)
//! * balanced, f=1: ξₙ ≈ (1−e^{−θ°})⁻¹ (σ°√(2πn))⁻¹ exp(χ°n)
//! * slow, f < 1:   ξₙ ≈ (τ* σ₋ √(2πφₙ))⁻¹ exp(χ⁻φₙ + w̄₁ φₙ/ψₙ)
//!
//! with the correction terms present only when the regime order (m₊ or m₋)
//! calls for them. A finite-n saddlepoint evaluator built on the exact twist
//! θₙ serves as the common reference implementation for all three.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::lmgf_n;
use crate::model::{GrowthExponent, Model, Scaling};
use crate::twist::{
    balanced_constants, fast_constants, slow_constants, solve_theta_n, BalancedConstants,
    FastConstants, SlowConstants,
};

/// Tolerance band used when a floating-point exponent sits on a regime-order
/// boundary; exact rationals are classified without it.
const BOUNDARY_BAND: f64 = 1e-12;

/// Scaling regime with the number of exponent correction terms it keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    Fast { m_plus: u32 },
    Balanced,
    Slow { m_minus: u32 },
}

impl Regime {
    pub fn order(&self) -> u32 {
        match self {
            Regime::Fast { m_plus } => *m_plus,
            Regime::Balanced => 0,
            Regime::Slow { m_minus } => *m_minus,
        }
    }
}

/// The regime constants backing an assembled approximation.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum RegimeConstants {
    Fast(FastConstants),
    Balanced(BalancedConstants),
    Slow(SlowConstants),
}

/// One term of the exponent: `value = coefficient · φₙ ψₙ^order`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentTerm {
    /// Power of ψₙ multiplying φₙ in this term (1 ↦ χ·n, 0 ↦ χ·φₙ, …).
    pub order: i32,
    pub coefficient: f64,
    pub value: f64,
}

/// Fully assembled approximation of ξₙ(u) with its term breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticResult {
    pub regime: Regime,
    pub constants: RegimeConstants,
    pub exponent_terms: Vec<ExponentTerm>,
    pub prefactor: f64,
    /// The approximation: `prefactor · exp(Σ exponent_terms)`.
    pub xi: f64,
    /// χ⁺, χ°, or χ⁻.
    pub log_decay_rate: f64,
    /// True when f sits exactly on a regime-order boundary (e.g. f = 2),
    /// where the highest kept term neither grows nor vanishes.
    pub boundary_f: bool,
}

impl AsymptoticResult {
    /// ln ξₙ(u); finite even when the probability underflows f64.
    pub fn log_xi(&self) -> f64 {
        self.prefactor.ln() + self.exponent_terms.iter().map(|t| t.value).sum::<f64>()
    }
}

/// Scale on which the logarithmic decay rate applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayScale {
    /// log ξₙ / n converges.
    PerN,
    /// log ξₙ / φₙ converges.
    PerPhi,
}

/// Logarithmic decay rate together with the scale it multiplies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRate {
    pub rate: f64,
    pub scale: DecayScale,
}

fn classify(scaling: &Scaling) -> (Regime, bool) {
    if scaling.is_balanced() {
        return (Regime::Balanced, false);
    }
    match scaling.f {
        GrowthExponent::Rational { num, den } => {
            if num > den {
                // m₊ = max{k ≥ 1 : f ≤ k/(k−1)} = ⌊f/(f−1)⌋, exact in integers.
                let d = num - den;
                (Regime::Fast { m_plus: num / d }, num % d == 0)
            } else {
                // m₋ = max{k ≥ 0 : f ≥ k/(k+1)} = ⌊f/(1−f)⌋.
                let d = den - num;
                (Regime::Slow { m_minus: num / d }, num % d == 0)
            }
        }
        GrowthExponent::Value(f) => {
            if (f - 1.0).abs() <= BOUNDARY_BAND {
                return (Regime::Balanced, false);
            }
            let x = if f > 1.0 { f / (f - 1.0) } else { f / (1.0 - f) };
            let near = x.round();
            let (m, boundary) = if (x - near).abs() <= BOUNDARY_BAND * x.abs().max(1.0) {
                (near, true)
            } else {
                (x.floor(), false)
            };
            let m = if m >= u32::MAX as f64 { u32::MAX } else { m as u32 };
            if f > 1.0 {
                (Regime::Fast { m_plus: m.max(1) }, boundary)
            } else {
                (Regime::Slow { m_minus: m }, boundary)
            }
        }
    }
}

/// Classify the scaling regime and its correction order.
pub fn classify_regime(scaling: &Scaling) -> Regime {
    classify(scaling).0
}

/// Assemble the tail approximation ξₙ(u) for the model's regime.
pub fn approximate_xi(model: &Model) -> Result<AsymptoticResult> {
    let scaling = model.scaling();
    let (regime, boundary_f) = classify(&scaling);
    let n = scaling.n as f64;
    let phi = scaling.phi();
    let psi = scaling.psi();
    let two_pi = 2.0 * std::f64::consts::PI;

    let (constants, terms, prefactor, rate): (RegimeConstants, Vec<ExponentTerm>, f64, f64) =
        match regime {
            Regime::Fast { m_plus } => {
                if m_plus > 2 {
                    return Err(Error::UnsupportedOrder {
                        m: m_plus,
                        f: scaling.f_value(),
                        missing: "vbar_3",
                    });
                }
                let fc = fast_constants(model)?;
                let mut terms = vec![ExponentTerm {
                    order: 1,
                    coefficient: fc.chi_plus,
                    value: fc.chi_plus * n,
                }];
                if m_plus >= 2 {
                    terms.push(ExponentTerm {
                        order: 2,
                        coefficient: fc.vbar2,
                        value: fc.vbar2 * phi * psi * psi,
                    });
                }
                let pref = 1.0
                    / (-(-fc.theta_star).exp_m1() * fc.sigma_plus_sq.sqrt() * (two_pi * n).sqrt());
                (RegimeConstants::Fast(fc), terms, pref, fc.chi_plus)
            }
            Regime::Balanced => {
                let bc = balanced_constants(model)?;
                let terms = vec![ExponentTerm {
                    order: 1,
                    coefficient: bc.chi_circ,
                    value: bc.chi_circ * n,
                }];
                let pref = 1.0
                    / (-(-bc.theta_circ).exp_m1() * bc.sigma_circ_sq.sqrt() * (two_pi * n).sqrt());
                (RegimeConstants::Balanced(bc), terms, pref, bc.chi_circ)
            }
            Regime::Slow { m_minus } => {
                if m_minus > 1 {
                    return Err(Error::UnsupportedOrder {
                        m: m_minus,
                        f: scaling.f_value(),
                        missing: "wbar_2",
                    });
                }
                if !model.subordinator().non_lattice() {
                    return Err(Error::Unsupported(
                        "slow-regime asymptotics require a non-lattice increment law; \
                         declare non_lattice on the custom exponent"
                            .into(),
                    ));
                }
                let sc = slow_constants(model)?;
                let mut terms = vec![ExponentTerm {
                    order: 0,
                    coefficient: sc.chi_minus,
                    value: sc.chi_minus * phi,
                }];
                if m_minus >= 1 {
                    terms.push(ExponentTerm {
                        order: -1,
                        coefficient: sc.wbar1,
                        value: sc.wbar1 * phi / psi,
                    });
                }
                let pref =
                    1.0 / (sc.tau_star * sc.sigma_minus_sq.sqrt() * (two_pi * phi).sqrt());
                (RegimeConstants::Slow(sc), terms, pref, sc.chi_minus)
            }
        };

    let exponent: f64 = terms.iter().map(|t| t.value).sum();
    let xi = prefactor * exponent.exp();
    Ok(AsymptoticResult {
        regime,
        constants,
        exponent_terms: terms,
        prefactor,
        xi,
        log_decay_rate: rate,
        boundary_f,
    })
}

/// Point-probability variant P(N_n = round(u·n)): the tail approximation
/// times (1 − e^{−θ}), available in the fast and balanced regimes.
pub fn point_probability(model: &Model) -> Result<f64> {
    let scaling = model.scaling();
    match classify_regime(&scaling) {
        Regime::Slow { .. } => {
            return Err(Error::Unsupported(
                "no point-probability asymptotics in the slow regime".into(),
            ))
        }
        Regime::Fast { .. } | Regime::Balanced => {}
    }
    // The point mass sits on the integer lattice.
    let un = (model.u() * scaling.n as f64).round();
    let u_eff = un / scaling.n as f64;
    let adjusted = model.with_u(u_eff)?;
    let result = approximate_xi(&adjusted)?;
    let factor = match result.constants {
        RegimeConstants::Fast(fc) => -(-fc.theta_star).exp_m1(),
        RegimeConstants::Balanced(bc) => -(-bc.theta_circ).exp_m1(),
        RegimeConstants::Slow(_) => unreachable!("slow regime rejected above"),
    };
    Ok(result.xi * factor)
}

/// Finite-n lattice saddlepoint evaluation built on the exact twist θₙ:
///
///   exp(γₙ(θₙ) − θₙ u n) / ((1 − e^{−θₙ}) √(2π γₙ''(θₙ)))
///
/// One expression that reproduces each theorem prefactor in its limit; used
/// as the cross-check reference for `approximate_xi`.
pub fn saddlepoint_reference(model: &Model) -> Result<f64> {
    Ok(saddlepoint_reference_log(model)?.exp())
}

/// Natural log of [`saddlepoint_reference`]; finite even when the
/// probability underflows f64.
pub fn saddlepoint_reference_log(model: &Model) -> Result<f64> {
    let theta = solve_theta_n(model)?;
    let un = model.u() * model.scaling().n as f64;
    let gamma0 = lmgf_n(theta, model, 0)?;
    let gamma2 = lmgf_n(theta, model, 2)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(gamma0 - theta * un - (-(-theta).exp_m1()).ln() - 0.5 * (two_pi * gamma2).ln())
}

/// The logarithmic decay rate and the scale it multiplies.
pub fn decay_rate(model: &Model) -> Result<DecayRate> {
    let scaling = model.scaling();
    match classify_regime(&scaling) {
        Regime::Fast { .. } => {
            Ok(DecayRate { rate: fast_constants(model)?.chi_plus, scale: DecayScale::PerN })
        }
        Regime::Balanced => {
            Ok(DecayRate { rate: balanced_constants(model)?.chi_circ, scale: DecayScale::PerN })
        }
        Regime::Slow { .. } => {
            Ok(DecayRate { rate: slow_constants(model)?.chi_minus, scale: DecayScale::PerPhi })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, Service, Subordinator};
    use proptest::prelude::*;

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

    fn det(f: GrowthExponent, n: u64) -> Model {
        model(Service::Deterministic { d: 0.5 }, 1.0, f, n)
    }

    fn rational(num: u32, den: u32) -> GrowthExponent {
        GrowthExponent::Rational { num, den }
    }

    #[test]
    fn regime_classification_examples() {
        let cases = [
            (rational(5, 2), Regime::Fast { m_plus: 1 }),
            (rational(5, 3), Regime::Fast { m_plus: 2 }),
            (rational(1, 1), Regime::Balanced),
            (rational(3, 5), Regime::Slow { m_minus: 1 }),
            (rational(2, 5), Regime::Slow { m_minus: 0 }),
            (rational(2, 1), Regime::Fast { m_plus: 2 }),
            (rational(1, 2), Regime::Slow { m_minus: 1 }),
            (rational(3, 2), Regime::Fast { m_plus: 3 }),
            (rational(2, 3), Regime::Slow { m_minus: 2 }),
        ];
        for (f, want) in cases {
            let got = classify_regime(&Scaling::new(100, f));
            assert_eq!(got, want, "f = {f:?}");
        }
        // Boundary flags: f = 2 and f = 1/2 are exact boundaries.
        assert!(classify(&Scaling::new(10, rational(2, 1))).1);
        assert!(classify(&Scaling::new(10, rational(1, 2))).1);
        assert!(!classify(&Scaling::new(10, rational(5, 3))).1);
    }

    #[test]
    fn float_and_rational_classification_agree() {
        for (num, den) in [(5u32, 2u32), (5, 3), (3, 5), (2, 5), (7, 4), (4, 7)] {
            let r = classify_regime(&Scaling::new(10, rational(num, den)));
            let v = classify_regime(&Scaling::new(
                10,
                GrowthExponent::Value(f64::from(num) / f64::from(den)),
            ));
            assert_eq!(r, v, "{num}/{den}");
        }
    }

    // ξ anchors frozen from a 30-digit independent evaluation of the same
    // closed formulas (quadrature + root refinement).
    #[test]
    fn xi_reference_anchors() {
        let cases: [(Service, GrowthExponent, u64, f64); 8] = [
            (Service::Deterministic { d: 0.5 }, rational(2, 5), 3000, 2.613_211e-3),
            (Service::Deterministic { d: 0.5 }, rational(3, 5), 200, 4.140_787e-3),
            (Service::Deterministic { d: 0.5 }, rational(1, 1), 50, 1.863_241e-3),
            (Service::Deterministic { d: 0.5 }, rational(5, 3), 30, 9.644_068e-4),
            (Service::Deterministic { d: 0.5 }, rational(5, 2), 30, 4.435_032e-4),
            (Service::Exponential { nu: 2.0 }, rational(2, 5), 3000, 2.483_090e-5),
            (Service::Exponential { nu: 1.594 }, rational(1, 1), 75, 3.063_998e-5),
            (Service::PowerLaw { kappa: 2.0 }, rational(5, 3), 30, 6.979_925e-7),
        ];
        for (svc, f, n, want) in cases {
            let m = model(svc, 1.0, f, n);
            let got = approximate_xi(&m).unwrap().xi;
            let rel = (got - want).abs() / want;
            assert!(rel < 1e-6, "{:?} f={f:?} n={n}: xi = {got:e}, want {want:e}", m.service());
        }
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        for f in [rational(3, 2), rational(7, 5), GrowthExponent::Value(1.4)] {
            let err = approximate_xi(&det(f, 30)).unwrap_err();
            assert!(matches!(err, Error::UnsupportedOrder { missing: "vbar_3", .. }), "f = {f:?}");
        }
        for f in [rational(2, 3), rational(4, 5), GrowthExponent::Value(0.7)] {
            let err = approximate_xi(&det(f, 30)).unwrap_err();
            assert!(matches!(err, Error::UnsupportedOrder { missing: "wbar_2", .. }), "f = {f:?}");
        }
    }

    #[test]
    fn exponent_term_structure() {
        // Full separation: single term in the exponent.
        let r = approximate_xi(&det(rational(5, 2), 30)).unwrap();
        assert_eq!(r.exponent_terms.len(), 1);
        assert_eq!(r.exponent_terms[0].order, 1);

        let r = approximate_xi(&det(rational(2, 5), 3000)).unwrap();
        assert_eq!(r.exponent_terms.len(), 1);
        assert_eq!(r.exponent_terms[0].order, 0);

        // Moderate separation keeps one correction term.
        let r = approximate_xi(&det(rational(5, 3), 30)).unwrap();
        assert_eq!(r.exponent_terms.len(), 2);
        assert_eq!(r.exponent_terms[1].order, 2);

        let r = approximate_xi(&det(rational(3, 5), 200)).unwrap();
        assert_eq!(r.exponent_terms.len(), 2);
        assert_eq!(r.exponent_terms[1].order, -1);
    }

    #[test]
    fn xi_reassembles_from_terms_bitwise() {
        for f in [rational(2, 5), rational(3, 5), rational(1, 1), rational(5, 3), rational(5, 2)] {
            let r = approximate_xi(&det(f, 200)).unwrap();
            let total: f64 = r.exponent_terms.iter().map(|t| t.value).sum();
            assert_eq!(r.xi, r.prefactor * total.exp(), "f = {f:?}");
            assert!(r.xi > 0.0 && r.xi < 1.0, "sanity bound at f = {f:?}: {}", r.xi);
        }
    }

    #[test]
    fn full_timescale_separation_matches_poisson_limit() {
        // f > 2: the count behaves like a Poisson variable with mean c·n, and
        // the approximation must coincide with its lattice tail asymptotics.
        let m = det(rational(5, 2), 30);
        let r = approximate_xi(&m).unwrap();
        let n = 30.0;
        let (u, c) = (m.u(), m.mean_load());
        let theta = (u / c).ln();
        let rate_fn = u * (u / c).ln() - (u - c);
        let poisson_br = 1.0 / (1.0 - (-theta).exp()) / (u.sqrt() * (2.0 * std::f64::consts::PI * n).sqrt())
            * (-rate_fn * n).exp();
        assert!(
            ((r.xi - poisson_br) / poisson_br).abs() <= 1e-12,
            "xi = {}, poisson limit = {poisson_br}",
            r.xi
        );
    }

    #[test]
    fn point_probability_examples() {
        // Fast: factor 1 − e^{−θ*} = 1 − c/u = 0.5 for the half-load model.
        let m = det(rational(5, 2), 30);
        let xi = approximate_xi(&m).unwrap().xi;
        let p = point_probability(&m).unwrap();
        assert!((p - 0.5 * xi).abs() <= 1e-15 * xi, "p = {p:e}");

        let m = det(rational(1, 1), 50);
        let xi = approximate_xi(&m).unwrap().xi;
        let factor = 1.0 - (-((4.0f64 / 3.0).ln())).exp();
        let got = point_probability(&m).unwrap();
        assert!((got - factor * xi).abs() <= 1e-12 * got.abs());

        assert!(matches!(
            point_probability(&det(rational(3, 5), 50)).unwrap_err(),
            Error::Unsupported(_)
        ));
    }

    #[test]
    fn point_probability_rounds_the_level() {
        // u n = 30.6 rounds to 31: the factor and xi are evaluated at u' = 31/30.
        let m = model(Service::Deterministic { d: 0.5 }, 1.02, rational(5, 2), 30);
        let p = point_probability(&m).unwrap();
        let m31 = model(Service::Deterministic { d: 0.5 }, 31.0 / 30.0, rational(5, 2), 30);
        let want = approximate_xi(&m31).unwrap().xi * (1.0 - m31.mean_load() / m31.u());
        assert!((p - want).abs() <= 1e-15, "p = {p:e}, want {want:e}");
    }

    #[test]
    fn saddlepoint_reference_bands() {
        // Balanced: analytically the same expression once θₙ = θ°.
        let m = det(rational(1, 1), 50);
        let ratio = approximate_xi(&m).unwrap().xi / saddlepoint_reference(&m).unwrap();
        assert!((ratio - 1.0).abs() < 5e-3, "balanced ratio {ratio}");

        let m = det(rational(5, 2), 30);
        let ratio = approximate_xi(&m).unwrap().xi / saddlepoint_reference(&m).unwrap();
        assert!((0.95..=1.05).contains(&ratio), "fast ratio {ratio}");

        let m = det(rational(3, 5), 200);
        let ratio = approximate_xi(&m).unwrap().xi / saddlepoint_reference(&m).unwrap();
        assert!((0.9..=1.1).contains(&ratio), "slow ratio {ratio}");
    }

    #[test]
    fn saddlepoint_ratio_converges_along_n() {
        // |ratio − 1| decays monotonically on the n-ladder. The f = 2/5 case
        // converges slowest: its first dropped exponent term is
        // w̄₁ φₙ/ψₙ = 0.125·n^{-1/5}, still ≈ 0.02 at n = 10⁴, so the final
        // ratio sits near 0.978 rather than within 2% of 1.
        for (f, final_band) in [
            (rational(2, 5), 0.0325),
            (rational(3, 5), 0.02),
            (rational(1, 1), 0.02),
            (rational(5, 3), 0.02),
            (rational(5, 2), 0.02),
        ] {
            let mut last = f64::INFINITY;
            let mut final_err = f64::NAN;
            for n in [100_u64, 1000, 10_000] {
                let m = det(f, n);
                // Log-space ratio: the probabilities themselves underflow f64
                // around n = 10⁴ in the per-n regimes.
                let log_ratio = approximate_xi(&m).unwrap().log_xi()
                    - saddlepoint_reference_log(&m).unwrap();
                final_err = (log_ratio.exp() - 1.0).abs();
                assert!(final_err <= last + 1e-12, "f={f:?} n={n}: {final_err} > {last}");
                last = final_err;
            }
            assert!(final_err <= final_band, "f={f:?}: final |ratio-1| = {final_err}");
        }
    }

    #[test]
    fn decay_rates_by_regime() {
        let d = decay_rate(&det(rational(5, 2), 30)).unwrap();
        assert_eq!(d.scale, DecayScale::PerN);
        assert!((d.rate + 0.193_147_180_559_945_31).abs() < 1e-14);

        let d = decay_rate(&det(rational(3, 5), 30)).unwrap();
        assert_eq!(d.scale, DecayScale::PerPhi);
        assert!((d.rate + 0.153_426_409_720_027_35).abs() < 1e-12);

        let d = decay_rate(&det(rational(1, 1), 30)).unwrap();
        assert_eq!(d.scale, DecayScale::PerN);
        assert!((d.rate + 0.084_949_518_397_698_74).abs() < 1e-12);
    }

    #[test]
    fn decay_rate_vanishes_at_the_rarity_edge() {
        // χ⁺ = u − c − u log(u/c) → 0 as u ↓ c.
        let mut last = f64::NEG_INFINITY;
        for &u in &[1.0, 0.75, 0.6, 0.55, 0.51] {
            let m = model(Service::Deterministic { d: 0.5 }, u, rational(5, 2), 30);
            let rate = decay_rate(&m).unwrap().rate;
            assert!(rate < 0.0 && rate > last);
            last = rate;
        }
        assert!(last > -0.001, "chi_plus near the edge: {last}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn classification_brackets_match_orders(num in 1u32..40, den in 1u32..40) {
            prop_assume!(num != den);
            let regime = classify_regime(&Scaling::new(10, rational(num, den)));
            let f = f64::from(num) / f64::from(den);
            match regime {
                Regime::Fast { m_plus } => {
                    let k = f64::from(m_plus);
                    // f ≤ k/(k−1) and f > (k+1)/k
                    prop_assert!(f * (k - 1.0) <= k + 1e-12);
                    prop_assert!(f * k > k + 1.0 - 1e-12);
                }
                Regime::Slow { m_minus } => {
                    let k = f64::from(m_minus);
                    prop_assert!(f * (k + 1.0) >= k - 1e-12);
                    prop_assert!(f * (k + 2.0) < k + 1.0 + 1e-12);
                }
                Regime::Balanced => prop_assert!(num == den),
            }
        }
    }
}
