//! Problem instance: subordinator, service-time tail, rarity level, scaling.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals;
use crate::quad::QuadratureConfig;

/// Characteristic-exponent callbacks for a user-supplied increasing Lévy
/// process: β, β', β'', the domain boundary sup{θ : β(θ) < ∞}, and whether
/// the increment law is non-lattice (required for slow-regime output).
pub struct CustomExponent {
    pub exponent: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub theta_dom: f64,
    pub non_lattice: bool,
}

impl fmt::Debug for CustomExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomExponent")
            .field("theta_dom", &self.theta_dom)
            .field("non_lattice", &self.non_lattice)
            .finish_non_exhaustive()
    }
}

/// The driving subordinator, described by its characteristic exponent
/// β(θ) = log E e^{θB(1)}.
#[derive(Debug, Clone)]
pub enum Subordinator {
    /// Gamma process with the given shape intensity and rate:
    /// β(θ) = shape·(ln rate − ln(rate − θ)) on θ < rate.
    Gamma { shape: f64, rate: f64 },
    Custom(Arc<CustomExponent>),
}

impl Subordinator {
    /// β and its first two derivatives; `order` ∈ {0, 1, 2}.
    pub fn exponent(&self, order: u32, theta: f64) -> Result<f64> {
        let dom = self.theta_dom();
        if theta >= dom {
            return Err(Error::Domain(format!(
                "exponent argument {theta} is outside the domain (theta_dom = {dom})"
            )));
        }
        Ok(match self {
            Subordinator::Gamma { shape, rate } => match order {
                0 => shape * (rate.ln() - (rate - theta).ln()),
                1 => shape / (rate - theta),
                2 => shape / ((rate - theta) * (rate - theta)),
                _ => return Err(Error::Domain(format!("exponent order {order} not supported"))),
            },
            Subordinator::Custom(c) => match order {
                0 => (c.exponent)(theta),
                1 => (c.d1)(theta),
                2 => (c.d2)(theta),
                _ => return Err(Error::Domain(format!("exponent order {order} not supported"))),
            },
        })
    }

    /// Domain boundary sup{θ : β(θ) < ∞}.
    pub fn theta_dom(&self) -> f64 {
        match self {
            Subordinator::Gamma { rate, .. } => *rate,
            Subordinator::Custom(c) => c.theta_dom,
        }
    }

    /// Mean rate b = β'(0).
    pub fn mean_rate(&self) -> Result<f64> {
        self.exponent(1, 0.0)
    }

    pub fn is_gamma(&self) -> bool {
        matches!(self, Subordinator::Gamma { .. })
    }

    /// Whether the increment law is known to be non-lattice.
    pub fn non_lattice(&self) -> bool {
        match self {
            Subordinator::Gamma { .. } => true,
            Subordinator::Custom(c) => c.non_lattice,
        }
    }
}

/// User-supplied service-time tail evaluator.
pub struct TailFn {
    pub tail: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TailFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TailFn(..)")
    }
}

/// Service-time distribution, described by its tail F̄(s) = P(S > s).
#[derive(Debug, Clone)]
pub enum Service {
    /// All jobs last exactly `d` (in normalized time units).
    Deterministic { d: f64 },
    /// Exponential service with rate `nu`: F̄(s) = e^{-νs}.
    Exponential { nu: f64 },
    /// Power-law tail F̄(s) = (1+κs)^{-2}: finite mean 1/κ, infinite variance.
    PowerLaw { kappa: f64 },
    CustomTail(Arc<TailFn>),
}

impl Service {
    /// Tail value F̄(s).
    pub fn tail(&self, s: f64) -> f64 {
        match self {
            Service::Deterministic { d } => {
                if s < *d {
                    1.0
                } else {
                    0.0
                }
            }
            Service::Exponential { nu } => (-nu * s).exp(),
            Service::PowerLaw { kappa } => {
                let t = 1.0 + kappa * s;
                1.0 / (t * t)
            }
            Service::CustomTail(f) => (f.tail)(s),
        }
    }

    /// sup_s F̄(s) = F̄(0) for a nonincreasing tail.
    pub fn tail_sup(&self) -> f64 {
        self.tail(0.0)
    }

    /// Interior points of [0, 1] where the tail jumps; quadrature panels and
    /// simulation cells must not straddle these.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            Service::Deterministic { d } if *d < 1.0 => vec![*d],
            _ => Vec::new(),
        }
    }
}

/// Growth exponent `f` of the time-scaling φₙ = n^f. Supplying it as an
/// exact ratio keeps the regime order m₊/m₋ free of floating-point boundary
/// ambiguity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthExponent {
    Rational { num: u32, den: u32 },
    Value(f64),
}

impl GrowthExponent {
    pub fn value(&self) -> f64 {
        match self {
            GrowthExponent::Rational { num, den } => f64::from(*num) / f64::from(*den),
            GrowthExponent::Value(v) => *v,
        }
    }
}

impl fmt::Display for GrowthExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthExponent::Rational { num, den } => write!(f, "{num}/{den}"),
            GrowthExponent::Value(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for GrowthExponent {
    type Err = Error;

    /// Accepts an exact ratio ("5/3") or a decimal ("1.25").
    fn from_str(raw: &str) -> Result<Self> {
        if let Some((num, den)) = raw.split_once('/') {
            let num = num
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad exponent numerator in {raw:?}")))?;
            let den = den
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad exponent denominator in {raw:?}")))?;
            if den == 0 {
                return Err(Error::Config("exponent denominator must be nonzero".into()));
            }
            Ok(GrowthExponent::Rational { num, den })
        } else {
            let v = raw
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("exponent is not a number: {raw:?}")))?;
            Ok(GrowthExponent::Value(v))
        }
    }
}

/// System size and timescale split: φₙ = n^f, ψₙ = n^{1-f}, φₙψₙ = n.
#[derive(Debug, Clone, Copy)]
pub struct Scaling {
    pub n: u64,
    pub f: GrowthExponent,
}

impl Scaling {
    pub fn new(n: u64, f: GrowthExponent) -> Self {
        Self { n, f }
    }

    pub fn f_value(&self) -> f64 {
        self.f.value()
    }

    pub fn is_balanced(&self) -> bool {
        match self.f {
            GrowthExponent::Rational { num, den } => num == den,
            GrowthExponent::Value(v) => v == 1.0,
        }
    }

    /// φₙ = n^f.
    pub fn phi(&self) -> f64 {
        if self.is_balanced() {
            self.n as f64
        } else {
            (self.f_value() * (self.n as f64).ln()).exp()
        }
    }

    /// ψₙ = n^{1-f}.
    pub fn psi(&self) -> f64 {
        if self.is_balanced() {
            1.0
        } else {
            ((1.0 - self.f_value()) * (self.n as f64).ln()).exp()
        }
    }
}

/// Unvalidated problem description.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub subordinator: Subordinator,
    pub service: Service,
    /// Rarity threshold per unit of n: the event is {N_n ≥ u·n}.
    pub u: f64,
    pub scaling: Scaling,
}

/// Number of grid points used to check tail validity on [0, 1].
const TAIL_GRID: usize = 1024;

impl ModelSpec {
    /// Check all structural invariants and cache the derived rates.
    ///
    /// Rejects nonpositive parameters, tails that leave [0, 1] or increase on
    /// the normalized horizon, exponents that fail β(0) = 0 / monotonicity /
    /// convexity spot checks, and thresholds `u` at or below the mean load.
    pub fn validate(self) -> Result<Model> {
        match &self.subordinator {
            Subordinator::Gamma { shape, rate } => {
                if !(*shape > 0.0) || !(*rate > 0.0) {
                    return Err(Error::Domain(
                        "gamma subordinator needs positive shape and rate".into(),
                    ));
                }
            }
            Subordinator::Custom(c) => {
                if !(c.theta_dom > 0.0) {
                    return Err(Error::Domain("custom exponent needs theta_dom > 0".into()));
                }
                let beta0 = (c.exponent)(0.0);
                if beta0.abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "custom exponent must satisfy beta(0) = 0, got {beta0}"
                    )));
                }
                if !((c.d1)(0.0) > 0.0) {
                    return Err(Error::Domain("custom exponent needs beta'(0) > 0".into()));
                }
                // Spot-check increasing convexity strictly inside the domain.
                for i in 1..64 {
                    let theta = c.theta_dom * (i as f64) / 64.0 * 0.95;
                    if !((c.d1)(theta) > 0.0) || (c.d2)(theta) < 0.0 {
                        return Err(Error::Domain(format!(
                            "custom exponent not increasing and convex at theta = {theta}"
                        )));
                    }
                }
            }
        }

        match &self.service {
            Service::Deterministic { d } if !(*d > 0.0) => {
                return Err(Error::Domain("deterministic service needs d > 0".into()))
            }
            Service::Exponential { nu } if !(*nu > 0.0) => {
                return Err(Error::Domain("exponential service needs nu > 0".into()))
            }
            Service::PowerLaw { kappa } if !(*kappa > 0.0) => {
                return Err(Error::Domain("power-law service needs kappa > 0".into()))
            }
            _ => {}
        }

        // Grid test: F̄ ∈ [0, 1] and nonincreasing on the normalized horizon.
        let mut prev = f64::INFINITY;
        for i in 0..=TAIL_GRID {
            let s = i as f64 / TAIL_GRID as f64;
            let v = self.service.tail(s);
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Tail(format!("tail value {v} at s = {s} is outside [0, 1]")));
            }
            if v > prev + 1e-12 {
                return Err(Error::Tail(format!("tail increases at s = {s}: {v} > {prev}")));
            }
            prev = v;
        }

        if !(self.u > 0.0) {
            return Err(Error::Domain("threshold u must be positive".into()));
        }
        if self.scaling.n == 0 {
            return Err(Error::Domain("system size n must be positive".into()));
        }
        if !(self.scaling.f_value() > 0.0) {
            return Err(Error::Domain("scaling exponent f must be positive".into()));
        }
        if let GrowthExponent::Rational { den, .. } = self.scaling.f {
            if den == 0 {
                return Err(Error::Domain("scaling exponent denominator must be nonzero".into()));
            }
        }

        let b = self.subordinator.mean_rate()?;
        let z1 = functionals::z_plus_with(1, &self.service, &QuadratureConfig::default())?;
        let c = b * z1;
        if self.u <= c {
            return Err(Error::RarityViolation { u: self.u, c });
        }

        Ok(Model { spec: self, b, c })
    }
}

/// A validated problem instance with the cached mean rate b = β'(0) and mean
/// load c = b·z₁⁺. Immutable; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    b: f64,
    c: f64,
}

impl Model {
    pub fn subordinator(&self) -> &Subordinator {
        &self.spec.subordinator
    }

    pub fn service(&self) -> &Service {
        &self.spec.service
    }

    pub fn u(&self) -> f64 {
        self.spec.u
    }

    pub fn scaling(&self) -> Scaling {
        self.spec.scaling
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Mean rate b = β'(0) of the subordinator.
    pub fn mean_rate(&self) -> f64 {
        self.b
    }

    /// Mean load c = b·z₁⁺, so that E N_n = n·c.
    pub fn mean_load(&self) -> f64 {
        self.c
    }

    /// Same model with a different scaling (the validated pieces carry over).
    pub fn with_scaling(&self, scaling: Scaling) -> Model {
        let mut m = self.clone();
        m.spec.scaling = scaling;
        m
    }

    /// Same model with a different threshold; revalidates rarity.
    pub fn with_u(&self, u: f64) -> Result<Model> {
        if u <= self.c {
            return Err(Error::RarityViolation { u, c: self.c });
        }
        let mut m = self.clone();
        m.spec.u = u;
        Ok(m)
    }
}
