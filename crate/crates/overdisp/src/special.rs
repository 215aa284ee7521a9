//! Special functions: dilogarithm and the regularized incomplete gamma.

use std::f64::consts::PI;

/// Li₂(x) for x ≤ 1.
///
/// Power series on |x| ≤ 1/2; the reflection, Landen, and inversion
/// identities map the remaining ranges onto it. Absolute error stays below
/// 1e-14 across the domain.
pub(crate) fn li2(x: f64) -> f64 {
    debug_assert!(x <= 1.0);
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return PI * PI / 6.0;
    }
    if x < -1.0 {
        // Li₂(x) = -π²/6 - ln²(-x)/2 - Li₂(1/x)
        let l = (-x).ln();
        return -PI * PI / 6.0 - 0.5 * l * l - li2(1.0 / x);
    }
    if x < -0.5 {
        // Landen: Li₂(x) = -Li₂(x/(x-1)) - ln²(1-x)/2, with x/(x-1) ∈ (0, 1/2].
        let l = (1.0 - x).ln();
        return -li2_series(x / (x - 1.0)) - 0.5 * l * l;
    }
    if x <= 0.5 {
        return li2_series(x);
    }
    // Reflection: Li₂(x) = π²/6 - ln(x) ln(1-x) - Li₂(1-x), 1-x ∈ (0, 1/2).
    PI * PI / 6.0 - x.ln() * (1.0 - x).ln() - li2_series(1.0 - x)
}

fn li2_series(x: f64) -> f64 {
    debug_assert!(x.abs() <= 0.5 + 1e-15);
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-3) {
        k += 1.0;
        term *= x;
        sum += term / (k * k);
    }
    sum
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, 9 coefficients).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the approximation in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x)/Γ(a), a > 0, x ≥ 0.
///
/// Series for x < a + 1, continued fraction (modified Lentz) otherwise.
pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    let prefactor = log_prefactor.exp();
    if x < a + 1.0 {
        gamma_p_series(a, x, prefactor)
    } else {
        1.0 - gamma_q_cf(a, x, prefactor)
    }
}

fn gamma_p_series(a: f64, x: f64, prefactor: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    (prefactor * sum).clamp(0.0, 1.0)
}

fn gamma_q_cf(a: f64, x: f64, prefactor: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    (prefactor * h).clamp(0.0, 1.0)
}
