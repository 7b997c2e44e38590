//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's quadrature or density code.

#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

/// ∫₀^∞ f(x) dx by the exp-sinh substitution x = exp(π/2·sinh τ) and
/// trapezoidal sums with step halving.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F) -> f64 {
    let node = |tau: f64| {
        let x = (0.5 * PI * tau.sinh()).exp();
        let dx = 0.5 * PI * tau.cosh() * x;
        if x == 0.0 || !x.is_finite() || !dx.is_finite() {
            0.0
        } else {
            let v = f(x) * dx;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        }
    };
    let span = 6.5;
    let mut h = 0.5;
    let mut sum: f64 = (-13..=13).map(|k| node(k as f64 * h)).sum();
    let mut estimate = sum * h;
    for _ in 0..10 {
        h /= 2.0;
        let mut k = 1;
        loop {
            let tau = k as f64 * h;
            if tau > span {
                break;
            }
            sum += node(tau) + node(-tau);
            k += 2;
        }
        let next = sum * h;
        if (next - estimate).abs() <= 1e-14 * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// ∫_a^b f(x) dx by tanh-sinh.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let node = |tau: f64| {
        let u = 0.5 * PI * tau.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * tau.cosh() / u.cosh().powi(2);
        if w == 0.0 || x.abs() >= 1.0 {
            0.0
        } else {
            f(c + r * x) * w
        }
    };
    let mut h = 0.5;
    let mut sum: f64 = (-8..=8).map(|k| node(k as f64 * h)).sum();
    let mut estimate = sum * h * r;
    for _ in 0..12 {
        h /= 2.0;
        let mut k = 1;
        while (k as f64) * h <= 4.0 {
            sum += node(k as f64 * h) + node(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h * r;
        if (next - estimate).abs() <= 1e-15 * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Gamma(shape θ, rate θ) density.
pub fn gamma_pdf(theta: f64, z: f64) -> f64 {
    Gamma::new(theta, theta).unwrap().pdf(z)
}

pub fn gamma_cdf(theta: f64, z: f64) -> f64 {
    Gamma::new(theta, theta).unwrap().cdf(z)
}

/// Inverse Gaussian IG(mean 1, shape θ) density.
pub fn ig_pdf(theta: f64, z: f64) -> f64 {
    (theta / (2.0 * PI * z.powi(3))).sqrt() * (-theta * (z - 1.0).powi(2) / (2.0 * z)).exp()
}

/// Inverse Gaussian IG(mean 1, shape θ) CDF, valid for moderate θ.
pub fn ig_cdf(theta: f64, z: f64) -> f64 {
    let n = |x: f64| 0.5 * statrs::function::erf::erfc(-x / 2f64.sqrt());
    let r = (theta / z).sqrt();
    n(r * (z - 1.0)) + (2.0 * theta).exp() * n(-r * (z + 1.0))
}

/// Standard normal CDF from statrs' erfc.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / 2f64.sqrt())
}

/// Geometric grid from `a` to `b` with `n` points.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
