//! Reference computations for the acceptance checks.
//!
//! Nothing here calls into atslab-core, so the checks compare the library
//! against code paths it does not share.

use std::f64::consts::PI;

/// ∫₀^∞ f(x) dx by the exp-sinh substitution x = exp(π/2·sinh τ) with
/// trapezoidal sums under step halving.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F) -> f64 {
    let node = |tau: f64| {
        let x = (0.5 * PI * tau.sinh()).exp();
        let dx = 0.5 * PI * tau.cosh() * x;
        if x == 0.0 || !x.is_finite() || !dx.is_finite() {
            return 0.0;
        }
        let v = f(x) * dx;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let span = 6.5;
    let mut h = 0.5;
    let mut sum: f64 = (-13..=13).map(|k| node(k as f64 * h)).sum();
    let mut estimate = sum * h;
    for _ in 0..10 {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= span {
            let tau = k as f64 * h;
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

/// Inverse Gaussian density with unit mean and shape θ.
pub fn ig_pdf(theta: f64, z: f64) -> f64 {
    (theta / (2.0 * PI * z.powi(3))).sqrt() * (-theta * (z - 1.0).powi(2) / (2.0 * z)).exp()
}

/// `n` evenly spaced points from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `n` geometrically spaced points from `a` to `b`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sinh_integrates_known_densities() {
        assert!((exp_sinh(|x| (-x).exp()) - 1.0).abs() < 1e-13);
        assert!((exp_sinh(|x| ig_pdf(2.0, x)) - 1.0).abs() < 1e-12);
        assert!((exp_sinh(|x| x * ig_pdf(0.5, x)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = geomspace(1e-4, 1.0, 5);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[4] - 1.0).abs() < 1e-15);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
