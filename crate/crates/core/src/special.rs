//! Normal-distribution helpers and thin wrappers over `statrs` special functions.
//!
//! The CDF differences used throughout pricing are evaluated so that both the
//! short-maturity regime (nearly equal arguments) and the far tails keep full
//! relative precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::{gamma, ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal density N'(x).
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF N(x).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − N(x), accurate for large positive `x`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// ln N(x), finite for arbitrarily negative `x`.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-normal_sf(x)).ln_1p()
    } else if x > -37.0 {
        normal_cdf(x).ln()
    } else {
        // Mills-ratio asymptotic series; the omitted term is below 1e-12 here.
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// N(a) − N(b) without cancellation.
///
/// For |a − b| < 1e−5 the midpoint expansion
/// N′(m)(a − b)(1 + (a − b)²(m² − 1)/24) is used; when both arguments sit in
/// the upper tail the difference is taken between survival functions.
pub fn normal_cdf_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() < 1e-5 {
        let m = 0.5 * (a + b);
        normal_pdf(m) * d * (1.0 + d * d * (m * m - 1.0) / 24.0)
    } else if a > 0.0 && b > 0.0 {
        normal_sf(b) - normal_sf(a)
    } else {
        normal_cdf(a) - normal_cdf(b)
    }
}

/// erf(x) expressed through the normal CDF identity erf(x) = 2N(√2·x) − 1.
#[inline]
pub fn erf_via_normal(x: f64) -> f64 {
    2.0 * normal_cdf(SQRT_2 * x) - 1.0
}

/// Regularized lower incomplete gamma P(a, x), including the tiny-`x`
/// regime where the leading series term is evaluated in log space.
pub fn regularized_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1e-3 * (a + 1.0).min(1.0) {
        // x^a e^{-x} / Γ(a+1) · Σ x^n / ((a+1)…(a+n))
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..40 {
            term *= x / (a + n as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        return (a * x.ln() - x - ln_gamma(a + 1.0) + sum.ln()).exp();
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn regularized_gamma_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1e-3 * (a + 1.0).min(1.0) {
        return 1.0 - regularized_gamma_lower(a, x);
    }
    statrs::function::gamma::gamma_ur(a, x)
}
