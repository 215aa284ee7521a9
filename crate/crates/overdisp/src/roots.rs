//! Safeguarded scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Stopping rule for the scalar solvers: residual magnitude plus an
/// iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Convergence threshold on the residual |f(x)|.
    pub tol: f64,
    /// Maximum number of iterations.
    pub max_iter: u32,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200 }
    }
}

/// Find a root of `f` on `[a, b]` by Brent's method.
///
/// The bracket must satisfy `f(a)·f(b) ≤ 0`; inverse quadratic interpolation
/// and secant steps are accepted only when they stay inside the bracket,
/// otherwise the step falls back to bisection, so convergence is guaranteed
/// for any continuous `f`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &RootConfig) -> Result<f64> {
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::Domain("root tolerance and max_iter must be positive".into()));
    }
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Bracket(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..cfg.max_iter {
        if fb.abs() > fc.abs() {
            // b is the best estimate; keep it that way.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * f64::EPSILON;
        let xm = 0.5 * (c - b);
        if fb.abs() <= cfg.tol || xm.abs() <= tol1 {
            return Ok(b);
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt interpolation.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                // Secant.
                (2.0 * xm * s, 1.0 - s)
            } else {
                // Inverse quadratic.
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }

    Err(Error::Bracket(format!(
        "no convergence within {} iterations (last x = {b}, residual {fb:e})",
        cfg.max_iter
    )))
}
