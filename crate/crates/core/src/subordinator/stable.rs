//! Density of an exponentially tilted one-sided stable law.
//!
//! For 0 < α < 1 the law of S is p_S(z) = exp(A − λz)·p_X(z) with
//! A = θ(1−α)/α, λ = (1−α)θ and X = c^{1/α}·Y, c = A·λ^{−α}, where Y is the
//! standard positive stable law with E[e^{−uY}] = e^{−u^α}. The density of Y
//! comes from Zolotarev's integral
//!
//! ```text
//! p_Y(y) = α/((1−α)π) · y^{−1/(1−α)} · ∫₀^π a(φ)·exp(−a(φ)·y^{−α/(1−α)}) dφ
//! a(φ)   = (sin αφ / sin φ)^{1/(1−α)} · sin((1−α)φ) / sin αφ
//! ```
//!
//! a(φ) increases from α^{α/(1−α)}(1−α) at φ = 0 to +∞ at φ = π, so the
//! integrand a·e^{−aw} has a single peak at a = 1/w (or at φ = 0 when
//! 1/w < a(0)). Breakpoints are placed by inverting a(φ) at fixed multiples of
//! the decay length 1/w, and the integrand is evaluated relative to its peak so
//! the result is returned as a logarithm without overflow.

use std::f64::consts::PI;

use crate::error::AtsError;
use crate::quadrature::{integrate_with_breaks, QuadConfig};

/// e-folds past the peak beyond which the Zolotarev integrand is dropped.
const CUTOFF: f64 = 110.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct TiltedStable {
    alpha: f64,
    mass: f64,
    rate: f64,
    ln_scale: f64,
    a0: f64,
}

impl TiltedStable {
    pub(crate) fn new(alpha: f64, theta: f64) -> Self {
        let mass = theta * (1.0 - alpha) / alpha;
        let rate = (1.0 - alpha) * theta;
        let ln_c = mass.ln() - alpha * rate.ln();
        let a0 = alpha.powf(alpha / (1.0 - alpha)) * (1.0 - alpha);
        Self {
            alpha,
            mass,
            rate,
            ln_scale: ln_c / alpha,
            a0,
        }
    }

    fn ln_a(&self, phi: f64) -> f64 {
        let al = self.alpha;
        if phi < 1e-9 {
            return self.a0.ln();
        }
        let ls_a = (al * phi).sin().ln();
        ((ls_a - phi.sin().ln()) / (1.0 - al)) + ((1.0 - al) * phi).sin().ln() - ls_a
    }

    /// φ ∈ (lo, π) with a(φ) = target, by bisection (a is increasing).
    fn solve_phi(&self, target: f64, mut lo: f64) -> f64 {
        let ln_target = target.ln();
        let mut hi = PI;
        for _ in 0..56 {
            let mid = 0.5 * (lo + hi);
            if self.ln_a(mid) < ln_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Returns (ln p_S(z), relative error of the inner quadrature).
    pub(crate) fn log_density(&self, z: f64) -> (f64, f64) {
        let al = self.alpha;
        let ln_x = z.ln() - self.ln_scale;
        let ln_w = -al / (1.0 - al) * ln_x;
        let w = ln_w.exp();
        let ln_pref = (al / (1.0 - al)).ln() - PI.ln() - ln_x / (1.0 - al) - self.ln_scale;
        let tilt = self.mass - self.rate * z;
        if w == f64::INFINITY {
            return (f64::NEG_INFINITY, 0.0);
        }
        let a_star = self.a0.max(1.0 / w);
        let e_star = a_star.ln() - a_star * w;
        let bound = ln_pref + tilt + e_star + PI.ln();
        if bound < -800.0 {
            // Below the smallest double even with the full φ range at the peak.
            return (bound, 0.0);
        }

        let mut breaks = vec![0.0];
        let mut lo = 0.0;
        if a_star > self.a0 {
            let span = a_star - self.a0;
            for frac in [0.01, 0.1, 0.4, 0.8] {
                let phi = self.solve_phi(self.a0 + frac * span, lo);
                breaks.push(phi);
                lo = phi;
            }
            for delta in [2.0, 0.5] {
                let target = a_star - delta / w;
                if target > self.a0 + 0.8 * span {
                    let phi = self.solve_phi(target, lo);
                    breaks.push(phi);
                    lo = phi;
                }
            }
            let phi = self.solve_phi(a_star, lo);
            breaks.push(phi);
            lo = phi;
        }
        for delta in [0.5, 2.0, 6.0, 15.0, 35.0, 70.0, CUTOFF] {
            let phi = self.solve_phi(a_star + delta / w, lo);
            breaks.push(phi);
            lo = phi;
        }
        breaks.dedup_by(|a, b| *a <= *b);

        let integrand = |phi: f64| {
            let la = self.ln_a(phi);
            let a = la.exp();
            ((la - a_star.ln()) - (a - a_star) * w).exp()
        };
        let cfg = QuadConfig {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 400,
        };
        let (value, err) = match integrate_with_breaks(integrand, &breaks, cfg) {
            Ok(est) => (est.value, est.abs_error),
            Err(AtsError::Quadrature {
                estimate, achieved, ..
            }) => (estimate, achieved),
            Err(_) => (f64::NAN, f64::INFINITY),
        };
        if !(value > 0.0) {
            return (f64::NEG_INFINITY, if value == 0.0 { 0.0 } else { f64::INFINITY });
        }
        (ln_pref + tilt + e_star + value.ln(), err / value)
    }
}
