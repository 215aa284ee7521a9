//! Python bindings: the main model type plus the tail-approximation,
//! twist, and simulation entry points.
//!
//! ```python
//! import overdisp_py as od
//!
//! m = od.Model(service="det", u=1.0, f="5/3", n=30, d=0.5)
//! m.approximate()["xi"]          # tail-probability approximation
//! m.constants()["slow"]          # regime constants
//! m.simulate(samples=10_000)     # Monte Carlo cross-check
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use overdisp::asymptotics::{
    approximate_xi, decay_rate, point_probability, saddlepoint_reference, DecayScale,
};
use overdisp::mc::{estimate_is, estimate_plain, McConfig, Method};
use overdisp::model::{GrowthExponent, ModelSpec, Scaling, Service, Subordinator};
use overdisp::twist::{all_constants, solve_theta_n, variance_q};
use overdisp::Error;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_f(f: &Bound<'_, PyAny>) -> PyResult<GrowthExponent> {
    if let Ok(raw) = f.extract::<String>() {
        raw.parse().map_err(err)
    } else if let Ok(v) = f.extract::<f64>() {
        Ok(GrowthExponent::Value(v))
    } else {
        Err(PyValueError::new_err("f must be a string like \"5/3\" or a float"))
    }
}

/// A validated problem instance: gamma subordinator, service tail,
/// threshold u, and the scaling (f, n).
#[pyclass(module = "overdisp_py")]
struct Model {
    inner: overdisp::Model,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (service, u, f, n, *, shape=1.0, rate=1.0, d=None, nu=None, kappa=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        service: &str,
        u: f64,
        f: &Bound<'_, PyAny>,
        n: u64,
        shape: f64,
        rate: f64,
        d: Option<f64>,
        nu: Option<f64>,
        kappa: Option<f64>,
    ) -> PyResult<Self> {
        let service = match service.to_ascii_lowercase().as_str() {
            "det" | "deterministic" => Service::Deterministic {
                d: d.ok_or_else(|| PyValueError::new_err("det service needs d=..."))?,
            },
            "exp" | "exponential" => Service::Exponential {
                nu: nu.ok_or_else(|| PyValueError::new_err("exp service needs nu=..."))?,
            },
            "powerlaw" | "power-law" | "pl" => Service::PowerLaw {
                kappa: kappa
                    .ok_or_else(|| PyValueError::new_err("powerlaw service needs kappa=..."))?,
            },
            other => return Err(PyValueError::new_err(format!("unknown service {other:?}"))),
        };
        let spec = ModelSpec {
            subordinator: Subordinator::Gamma { shape, rate },
            service,
            u,
            scaling: Scaling::new(n, parse_f(f)?),
        };
        Ok(Model { inner: spec.validate().map_err(err)? })
    }

    /// Mean load per unit n: E N_n = n · mean_load().
    fn mean_load(&self) -> f64 {
        self.inner.mean_load()
    }

    /// Mean rate of the driving subordinator.
    fn mean_rate(&self) -> f64 {
        self.inner.mean_rate()
    }

    /// All regime constants as {"fast": {...}, "balanced": {...}, "slow": {...}}.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let (fast, balanced, slow) = all_constants(&self.inner).map_err(err)?;
        let out = PyDict::new(py);
        let f = PyDict::new(py);
        f.set_item("theta_star", fast.theta_star)?;
        f.set_item("v1", fast.v1)?;
        f.set_item("vbar2", fast.vbar2)?;
        f.set_item("chi_plus", fast.chi_plus)?;
        f.set_item("sigma_plus_sq", fast.sigma_plus_sq)?;
        let b = PyDict::new(py);
        b.set_item("theta_circ", balanced.theta_circ)?;
        b.set_item("chi_circ", balanced.chi_circ)?;
        b.set_item("sigma_circ_sq", balanced.sigma_circ_sq)?;
        let s = PyDict::new(py);
        s.set_item("tau_star", slow.tau_star)?;
        s.set_item("w2", slow.w2)?;
        s.set_item("wbar1", slow.wbar1)?;
        s.set_item("chi_minus", slow.chi_minus)?;
        s.set_item("sigma_minus_sq", slow.sigma_minus_sq)?;
        out.set_item("fast", f)?;
        out.set_item("balanced", b)?;
        out.set_item("slow", s)?;
        Ok(out)
    }

    /// The assembled tail approximation with its term breakdown.
    fn approximate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = approximate_xi(&self.inner).map_err(err)?;
        let out = PyDict::new(py);
        let (regime, order) = match r.regime {
            overdisp::asymptotics::Regime::Fast { m_plus } => ("fast", m_plus),
            overdisp::asymptotics::Regime::Balanced => ("balanced", 0),
            overdisp::asymptotics::Regime::Slow { m_minus } => ("slow", m_minus),
        };
        out.set_item("regime", regime)?;
        out.set_item("m", order)?;
        out.set_item("prefactor", r.prefactor)?;
        out.set_item("xi", r.xi)?;
        out.set_item("log_xi", r.log_xi())?;
        out.set_item("log_decay_rate", r.log_decay_rate)?;
        out.set_item("boundary_f", r.boundary_f)?;
        let terms: Vec<(i32, f64, f64)> =
            r.exponent_terms.iter().map(|t| (t.order, t.coefficient, t.value)).collect();
        out.set_item("exponent_terms", terms)?;
        Ok(out)
    }

    /// Point-probability variant P(N_n = round(u n)) (fast/balanced only).
    fn point_probability(&self) -> PyResult<f64> {
        point_probability(&self.inner).map_err(err)
    }

    /// Finite-n saddlepoint reference evaluation.
    fn saddlepoint_reference(&self) -> PyResult<f64> {
        saddlepoint_reference(&self.inner).map_err(err)
    }

    /// The exact finite-n twist θₙ solving γₙ'(θ) = u·n.
    fn solve_twist(&self) -> PyResult<f64> {
        solve_theta_n(&self.inner).map_err(err)
    }

    /// Tilted variance γₙ''(θ).
    fn tilted_variance(&self, theta: f64) -> PyResult<f64> {
        variance_q(&self.inner, theta).map_err(err)
    }

    /// Logarithmic decay rate and the scale it multiplies ("n" or "phi").
    fn decay_rate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = decay_rate(&self.inner).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("rate", d.rate)?;
        out.set_item("scale", match d.scale {
            DecayScale::PerN => "n",
            DecayScale::PerPhi => "phi",
        })?;
        Ok(out)
    }

    /// Monte Carlo estimate of the tail probability.
    ///
    /// Deterministic for a fixed (seed, samples, grid_cells), independent of
    /// the worker count.
    #[pyo3(signature = (*, samples=100_000, grid_cells=1024, seed=0, method="is", workers=1))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        samples: u64,
        grid_cells: u32,
        seed: u64,
        method: &str,
        workers: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let method = match method.to_ascii_lowercase().as_str() {
            "plain" => Method::Plain,
            "is" | "importance" | "importance_sampled" => Method::ImportanceSampled,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown method {other:?} (want \"plain\" or \"is\")"
                )))
            }
        };
        let cfg = McConfig { samples, grid_cells, seed, method, workers };
        let est = match method {
            Method::Plain => estimate_plain(&self.inner, &cfg),
            Method::ImportanceSampled => estimate_is(&self.inner, &cfg),
        }
        .map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("estimate", est.estimate)?;
        out.set_item("std_error", est.std_error)?;
        out.set_item("ci95", est.ci95)?;
        out.set_item("samples_used", est.samples_used)?;
        out.set_item(
            "method",
            match est.method {
                Method::Plain => "plain",
                Method::ImportanceSampled => "is",
            },
        )?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        let s = self.inner.scaling();
        format!(
            "Model(service={:?}, u={}, f={}, n={}, mean_load={:.6})",
            self.inner.service(),
            self.inner.u(),
            s.f,
            s.n,
            self.inner.mean_load()
        )
    }
}

/// Li₂(x) for x ≤ 1.
#[pyfunction]
fn dilog(x: f64) -> PyResult<f64> {
    overdisp::functionals::dilog(x).map_err(err)
}

/// Exact Poisson tail P(Poisson(lam) ≥ k).
#[pyfunction]
fn poisson_tail(k: u64, lam: f64) -> f64 {
    overdisp::mc::poisson_tail(k, lam)
}

#[pymodule]
fn overdisp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(dilog, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_tail, m)?)?;
    Ok(())
}
