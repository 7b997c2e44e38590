//! The unit-mean positive random variable S_t that subordinates the ATS
//! forward at a fixed maturity.
//!
//! S_t is defined through its Laplace transform
//!
//! ```text
//! ln L_t(u) = (t/k_t)·((1−α)/α)·(1 − (1 + u·k_t/((1−α)t))^α)   0 < α < 1
//! ln L_t(u) = −(t/k_t)·ln(1 + u·k_t/t)                         α = 0
//! ```
//!
//! so that E[S_t] = 1 and Var[S_t] = k_t/t. Writing θ = t/k_t, the α = 0 law
//! is Gamma(shape θ, rate θ) and the α = 1/2 law is Inverse Gaussian with
//! mean 1 and shape θ. Every other α is an exponentially tilted one-sided
//! stable law, whose density is evaluated from Zolotarev's integral
//! representation (see [`stable`]); a Fourier/Gil-Pelaez inversion of
//! L_t(−iu) is available in [`fourier`] as an independent route.
//!
//! Expectations against the law are computed in log space, s = ln z, so that
//! shapes θ ≪ 1 (mass spread over hundreds of decades near zero) and θ ≫ 1
//! (mass concentrated around one) are handled by the same code path.

pub mod fourier;
mod sampling;
mod stable;

use std::cell::Cell;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{AtsError, Result};
use crate::quadrature::{adaptive_panels, integrate_with_breaks, kronrod_21_nodes, Estimate, QuadConfig};
use crate::special::{
    gamma, ln_gamma, log_normal_cdf, normal_cdf, regularized_gamma_lower, regularized_gamma_upper,
};

pub use sampling::{derive_seed, SampleBatch, SamplingMethod, TABLE_KNOTS, TABLE_TAIL_PROBABILITY};
use stable::TiltedStable;

/// Smallest z resolved by log-space quadrature; mass below it is lumped.
pub(crate) const Z_FLOOR: f64 = 1e-280;

/// Which closed form, if any, backs the law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawFamily {
    /// α = 0.
    Gamma,
    /// α = 1/2.
    InverseGaussian,
    /// Any other α in (0, 1).
    TemperedStable,
}

/// Distribution of S_t at one maturity.
///
/// Immutable after construction and `Copy`; share freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinatorLaw {
    alpha: f64,
    t: f64,
    k_t: f64,
}

impl SubordinatorLaw {
    /// Builds the law for tempered-stable index `alpha` ∈ [0, 1), maturity
    /// `t` > 0 and jump-variance scale `k_t` > 0.
    pub fn new(alpha: f64, t: f64, k_t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(AtsError::InvalidParams(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(AtsError::InvalidParams(format!("t must be positive, got {t}")));
        }
        if !(k_t > 0.0) || !k_t.is_finite() {
            return Err(AtsError::InvalidParams(format!("k_t must be positive, got {k_t}")));
        }
        let law = Self { alpha, t, k_t };
        let theta = law.theta();
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(AtsError::InvalidParams(format!("t/k_t = {theta} is not representable")));
        }
        Ok(law)
    }

    /// Law with the power-law scale k_t = k̄·t^β.
    pub fn with_scaling(alpha: f64, t: f64, k_bar: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, t, k_bar * t.powf(beta))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k_t(&self) -> f64 {
        self.k_t
    }

    pub fn family(&self) -> LawFamily {
        if self.alpha == 0.0 {
            LawFamily::Gamma
        } else if self.alpha == 0.5 {
            LawFamily::InverseGaussian
        } else {
            LawFamily::TemperedStable
        }
    }

    /// θ = t/k_t, the inverse variance.
    pub fn theta(&self) -> f64 {
        self.t / self.k_t
    }

    /// Var[S_t] = k_t/t.
    pub fn variance(&self) -> f64 {
        self.k_t / self.t
    }

    /// Exponential tempering rate of the jump measure, (1−α)θ.
    pub(crate) fn rate(&self) -> f64 {
        (1.0 - self.alpha) * self.theta()
    }

    /// Total "mass" θ(1−α)/α of the tilted stable representation (α > 0).
    fn mass(&self) -> f64 {
        self.theta() * (1.0 - self.alpha) / self.alpha
    }

    /// ln L_t(u) for u ≥ 0.
    pub fn log_laplace(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(AtsError::Domain(format!("Laplace argument must be nonnegative, got {u}")));
        }
        Ok(self.log_laplace_ext(u))
    }

    /// L_t(u) for u ≥ 0.
    pub fn laplace(&self, u: f64) -> Result<f64> {
        self.log_laplace(u).map(f64::exp)
    }

    /// ln L_t(u) on its full real domain u > −(1−α)θ (moment generating side
    /// included). Written with `ln_1p`/`exp_m1` so that u·k_t/t ≪ 1 keeps
    /// full relative precision.
    pub(crate) fn log_laplace_ext(&self, u: f64) -> f64 {
        if self.alpha == 0.0 {
            let theta = self.theta();
            -theta * (u / theta).ln_1p()
        } else {
            -self.mass() * (self.alpha * (u / self.rate()).ln_1p()).exp_m1()
        }
    }

    /// ln L_t(w) for complex `w`, principal branch.
    ///
    /// Fails if Re(1 + w/((1−α)θ)) ≤ 0, where the principal power would cross
    /// its branch cut.
    pub fn log_laplace_complex(&self, w: Complex64) -> Result<Complex64> {
        let base = Complex64::new(1.0, 0.0) + w / self.rate();
        if !(base.re > 0.0) {
            return Err(AtsError::BranchCut(base.re));
        }
        if self.alpha == 0.0 {
            Ok(-self.theta() * base.ln())
        } else {
            let pow = (self.alpha * base.ln()).exp();
            Ok(self.mass() * (Complex64::new(1.0, 0.0) - pow))
        }
    }

    /// n-th cumulant, from derivatives of ln L_t at zero.
    pub fn cumulant(&self, n: u32) -> f64 {
        assert!(n >= 1, "cumulants start at order 1");
        let theta = self.theta();
        if self.alpha == 0.0 {
            // (n−1)!·θ^{1−n}
            let fact: f64 = (1..n).map(f64::from).product();
            fact * theta.powi(1 - n as i32)
        } else {
            // A·(−1)^{n+1}·α(α−1)…(α−n+1)·λ^{−n}
            let falling: f64 = (0..n).map(|j| self.alpha - f64::from(j)).product();
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            self.mass() * sign * falling * self.rate().powi(-(n as i32))
        }
    }

    /// E[S_t^n] for integer n ≥ 1, assembled from the cumulants.
    pub fn raw_moment(&self, n: u32) -> f64 {
        let mut moments = vec![1.0];
        for m in 1..=n {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for k in 1..=m {
                // binom = C(m−1, k−1)
                acc += binom * self.cumulant(k) * moments[(m - k) as usize];
                binom = binom * f64::from(m - k) / f64::from(k);
            }
            moments.push(acc);
        }
        moments[n as usize]
    }

    /// E[S_t^s] for s ∈ (0, 1) from
    /// E[S^s] = ∫₀^∞ (L(u) − 1)/(Γ(−s)·u^{s+1}) du.
    ///
    /// The integral is split at u = 1. Below, 1 − L is taken as −expm1(ln L);
    /// above, ∫₁^∞ u^{−s−1} du = 1/s is subtracted analytically so only the
    /// decaying part L(u)·u^{−s−1} is integrated. Both pieces run in w = ln u.
    pub fn fractional_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(AtsError::Domain(format!("fractional order must lie in (0, 1), got {s}")));
        }
        let cfg = QuadConfig::new(1e-15, 1e-12);
        let scale = self.theta().min(self.rate()).min(1.0);
        let w_lo = scale.ln() - 40.0 / (1.0 - s);
        let lower = |w: f64| -(self.log_laplace_ext(w.exp())).exp_m1() * (-s * w).exp();
        let lower_breaks = log_grid(w_lo, 0.0, &[self.theta().ln(), self.rate().ln()]);
        let below = integrate_with_breaks(lower, &lower_breaks, cfg)?;

        let w_hi = self.decay_horizon(|w| -s * w);
        let upper = |w: f64| (self.log_laplace_ext(w.exp()) - s * w).exp();
        let upper_breaks = log_grid(0.0, w_hi, &[self.theta().ln(), self.rate().ln()]);
        let above = integrate_with_breaks(upper, &upper_breaks, cfg)?;

        // −Γ(−s) > 0 for s ∈ (0, 1).
        Ok((below.value + 1.0 / s - above.value) / -gamma(-s))
    }

    /// E[S_t^{−n}] from E[S^{−n}] = Γ(n)^{−1}·∫₀^∞ u^{n−1}·L(u) du.
    ///
    /// The tail exponent p of L over the last decade [U/10, U] decides
    /// convergence: the integral is declared divergent when p ≥ −n − 0.1.
    pub fn inverse_moment(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(AtsError::Domain("inverse moment order must be positive".into()));
        }
        let nf = f64::from(n);
        let big_u = 1e12 * (1.0f64).max(1.0 / self.theta()).max(1.0 / self.rate()).max(self.theta());
        let exponent = (self.log_laplace_ext(big_u) - self.log_laplace_ext(big_u / 10.0)) / 10f64.ln();
        let limit = -nf - 0.1;
        if exponent >= limit {
            return Err(AtsError::Divergent { exponent, limit });
        }
        let log_integrand = |w: f64| nf * w + self.log_laplace_ext(w.exp());
        let w_lo = self.theta().min(1.0).ln() - 45.0 / nf;
        let w_hi = self.decay_horizon(|w| nf * w);
        let breaks = log_grid(w_lo, w_hi, &[self.theta().ln(), self.rate().ln()]);
        let cfg = QuadConfig::new(0.0, 1e-12);
        let est = integrate_with_breaks(|w| log_integrand(w).exp(), &breaks, cfg)?;
        Ok(est.value / gamma(nf))
    }

    /// Smallest w ≥ 0 past which exp(extra(w) + ln L(e^w)) has dropped 45
    /// e-folds below its running maximum (searched in unit steps).
    fn decay_horizon<F: Fn(f64) -> f64>(&self, extra: F) -> f64 {
        let value = |w: f64| extra(w) + self.log_laplace_ext(w.exp());
        let mut best = value(0.0);
        let mut w = 0.0;
        while w < 5000.0 {
            w += 1.0;
            let v = value(w);
            best = best.max(v);
            if v < best - 45.0 {
                break;
            }
        }
        w
    }

    /// ln(z·p(z)) at z = e^s.
    fn log_z_density(&self, s: f64, stable: Option<&TiltedStable>, worst: &Cell<f64>) -> f64 {
        let z = s.exp();
        let theta = self.theta();
        match self.family() {
            // θ ln θ − ln Γ(θ) + θ(s − z), rearranged so large θ does not cancel.
            LawFamily::Gamma => 0.5 * (theta / (2.0 * PI)).ln() - stirling_remainder(theta) - theta * exp_m1_minus_x(s),
            LawFamily::InverseGaussian => {
                0.5 * (theta / (2.0 * PI)).ln() - 0.5 * s - theta * (z - 1.0).powi(2) / (2.0 * z)
            }
            LawFamily::TemperedStable => {
                let st = stable.expect("tilted stable kernel prepared for generic alpha");
                let (ld, rel) = st.log_density(z);
                if rel > worst.get() {
                    worst.set(rel);
                }
                ld + s
            }
        }
    }

    fn stable_kernel(&self) -> Option<TiltedStable> {
        (self.family() == LawFamily::TemperedStable).then(|| TiltedStable::new(self.alpha, self.theta()))
    }

    /// Density of S_t at z > 0.
    pub fn density(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(AtsError::Domain(format!("density requires z > 0, got {z}")));
        }
        let kernel = self.stable_kernel();
        let worst = Cell::new(0.0);
        let lzp = self.log_z_density(z.ln(), kernel.as_ref(), &worst);
        check_inversion(worst.get())?;
        Ok((lzp - z.ln()).exp())
    }

    /// P(S_t < z). Zero for z ≤ 0.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        if z.is_nan() {
            return Err(AtsError::Domain("cdf argument is NaN".into()));
        }
        if z <= 0.0 {
            return Ok(0.0);
        }
        let theta = self.theta();
        match self.family() {
            LawFamily::Gamma => Ok(regularized_gamma_lower(theta, theta * z)),
            LawFamily::InverseGaussian => {
                if z == f64::INFINITY {
                    return Ok(1.0);
                }
                let r = (theta / z).sqrt();
                let first = normal_cdf(r * (z - 1.0));
                let second = (2.0 * theta + log_normal_cdf(-r * (z + 1.0))).exp();
                Ok((first + second).clamp(0.0, 1.0))
            }
            LawFamily::TemperedStable => {
                let s = z.ln();
                let (lo, hi) = self.log_support();
                if s <= lo {
                    return Ok(0.0);
                }
                if s >= hi {
                    return Ok(1.0);
                }
                let cfg = QuadConfig::new(1e-16, 1e-11);
                let breaks = self.log_breaks(&[]);
                if z <= 1.0 {
                    Ok(self.integrate_log_window(lo, s, &breaks, cfg)?.clamp(0.0, 1.0))
                } else {
                    Ok((1.0 - self.integrate_log_window(s, hi, &breaks, cfg)?).clamp(0.0, 1.0))
                }
            }
        }
    }

    /// P(S_t ≥ z), computed without the 1 − cdf cancellation for the closed
    /// forms.
    pub fn survival(&self, z: f64) -> Result<f64> {
        if z <= 0.0 {
            return Ok(1.0);
        }
        match self.family() {
            LawFamily::Gamma => Ok(regularized_gamma_upper(self.theta(), self.theta() * z)),
            _ => self.cdf(z).map(|p| 1.0 - p),
        }
    }

    /// ∫ p(e^s)·e^s ds over [a, b] in log space.
    fn integrate_log_window(&self, a: f64, b: f64, breaks: &[f64], cfg: QuadConfig) -> Result<f64> {
        let mut pts = vec![a];
        pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        pts.push(b);
        let kernel = self.stable_kernel();
        let worst = Cell::new(0.0);
        let est = integrate_with_breaks(
            |s| self.log_z_density(s, kernel.as_ref(), &worst).exp(),
            &pts,
            cfg,
        )?;
        check_inversion(worst.get())?;
        Ok(est.value)
    }

    /// Uniform distance bound ((2−α)/(1−α))·√(k_t/t) between the CDF of S_t
    /// and the matched Gaussian N((z − 1)·√(t/k_t)).
    pub fn gaussian_cdf_bound(&self) -> f64 {
        (2.0 - self.alpha) / (1.0 - self.alpha) * self.variance().sqrt()
    }

    /// Chernoff cutoff: P(S_t > z_max) ≤ e^{−90}.
    pub fn upper_cutoff(&self) -> f64 {
        let u = 0.5 * self.rate();
        let log_mgf = if self.alpha == 0.0 {
            self.theta() * LN_2
        } else {
            self.log_laplace_ext(-u)
        };
        ((log_mgf + 90.0) / u).max(2.0)
    }

    /// Log-space integration window [ln Z_FLOOR, ln z_max].
    pub(crate) fn log_support(&self) -> (f64, f64) {
        (Z_FLOOR.ln(), self.upper_cutoff().ln())
    }

    /// Breakpoints in s = ln z that bracket every scale on which the law can
    /// put mass, plus caller-supplied landmarks (given in z).
    pub(crate) fn log_breaks(&self, landmarks: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.log_support();
        let sd = self.variance().sqrt();
        let mut pts = vec![lo, hi];
        for e in [
            -200, -150, -100, -70, -50, -35, -25, -18, -14, -11, -9, -7, -6, -5, -4, -3, -2, -1,
        ] {
            pts.push(f64::from(e) * std::f64::consts::LN_10);
        }
        for k in [
            -8.0, -6.0, -4.0, -3.0, -2.0, -1.5, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0,
            4.0, 6.0, 9.0, 14.0, 20.0, 30.0, 45.0,
        ] {
            let z: f64 = 1.0 + k * sd;
            if z > 0.0 {
                pts.push(z.ln());
            }
        }
        let mut z = 2.0;
        while z < self.upper_cutoff() {
            pts.push(f64::ln(z));
            z *= 2.0;
        }
        pts.extend(landmarks.iter().filter(|&&z| z > 0.0).map(|z| z.ln()));
        pts.retain(|&s| s >= lo && s <= hi && s.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// E[g(S_t)] by adaptive quadrature in s = ln z.
    ///
    /// `landmarks` are z-values where `g` changes character (kinks, steep
    /// transitions); they become breakpoints. Mass below [`Z_FLOOR`] is
    /// lumped at g(Z_FLOOR), which is exact whenever g is constant to working
    /// precision on (0, Z_FLOOR].
    pub fn expectation<G: Fn(f64) -> f64>(
        &self,
        g: G,
        landmarks: &[f64],
        cfg: QuadConfig,
    ) -> Result<Estimate> {
        let breaks = self.log_breaks(landmarks);
        let kernel = self.stable_kernel();
        let worst = Cell::new(0.0);
        let body = integrate_with_breaks(
            |s| {
                let lzp = self.log_z_density(s, kernel.as_ref(), &worst);
                if lzp == f64::NEG_INFINITY {
                    0.0
                } else {
                    g(s.exp()) * lzp.exp()
                }
            },
            &breaks,
            cfg,
        )?;
        check_inversion(worst.get())?;
        let lump = match self.family() {
            LawFamily::Gamma => {
                let mass = regularized_gamma_lower(self.theta(), self.theta() * Z_FLOOR);
                if mass > 0.0 {
                    mass * g(Z_FLOOR)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        Ok(body
            + Estimate {
                value: lump,
                abs_error: 0.0,
            })
    }

    /// Freezes the panels that adaptive integration of `g_ref` would use into
    /// a reusable rule, so that a family of similar integrands can be
    /// integrated without re-evaluating the density.
    pub fn expectation_rule<G: Fn(f64) -> f64>(
        &self,
        g_ref: G,
        landmarks: &[f64],
        cfg: QuadConfig,
    ) -> Result<ExpectationRule> {
        let breaks = self.log_breaks(landmarks);
        let kernel = self.stable_kernel();
        let worst = Cell::new(0.0);
        let zp = |s: f64| self.log_z_density(s, kernel.as_ref(), &worst).exp();
        let panels = adaptive_panels(|s| g_ref(s.exp()) * zp(s), &breaks, cfg)?;
        let mut nodes = Vec::with_capacity(21 * panels.len());
        for (a, b) in panels {
            for (s, wk, wg) in kronrod_21_nodes(a, b) {
                let d = zp(s);
                nodes.push((s.exp(), wk * d, wg * d));
            }
        }
        check_inversion(worst.get())?;
        let lump = match self.family() {
            LawFamily::Gamma => regularized_gamma_lower(self.theta(), self.theta() * Z_FLOOR),
            _ => 0.0,
        };
        Ok(ExpectationRule { nodes, lump })
    }

    /// Draws `count` i.i.d. samples of S_t; deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        sampling::sample(self, count, seed)
    }
}

/// Fixed nodes and density-weighted Kronrod/Gauss weights for one law.
#[derive(Debug, Clone)]
pub struct ExpectationRule {
    nodes: Vec<(f64, f64, f64)>,
    lump: f64,
}

impl ExpectationRule {
    /// E[g(S_t)] with the Kronrod−Gauss difference as error estimate.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> Estimate {
        let mut kronrod = 0.0;
        let mut gauss = 0.0;
        for &(z, wk, wg) in &self.nodes {
            let v = g(z);
            kronrod += wk * v;
            gauss += wg * v;
        }
        let lump = if self.lump > 0.0 { self.lump * g(Z_FLOOR) } else { 0.0 };
        Estimate {
            value: kronrod + lump,
            abs_error: (kronrod - gauss).abs(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Inner (Zolotarev) quadratures must reach this relative accuracy.
const INVERSION_TOLERANCE: f64 = 1e-8;

/// ln Γ(x) − [(x − 1/2) ln x − x + ln(2π)/2].
fn stirling_remainder(x: f64) -> f64 {
    if x < 15.0 {
        return ln_gamma(x) - ((x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln());
    }
    let r = 1.0 / (x * x);
    (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r * (1.0 / 1680.0 - r / 1188.0)))) / x
}

/// eˢ − 1 − s without cancellation near zero.
fn exp_m1_minus_x(s: f64) -> f64 {
    if s.abs() > 0.1 {
        return s.exp_m1() - s;
    }
    let mut term = s * s / 2.0;
    let mut sum = term;
    for k in 3..20 {
        term *= s / k as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn check_inversion(worst: f64) -> Result<()> {
    if worst > INVERSION_TOLERANCE {
        Err(AtsError::Inversion {
            achieved: worst,
            tolerance: INVERSION_TOLERANCE,
        })
    } else {
        Ok(())
    }
}

/// Unit-spaced grid on [a, b] merged with extra interior points.
fn log_grid(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    let mut w = a.ceil();
    while w < b {
        pts.push(w);
        w += 1.0;
    }
    pts.extend(extra.iter().copied().filter(|&x| x > a && x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    pts
}
