//! European option prices under F₀ = 1 and unit discount, in the
//! moneyness-degree coordinate y = ln(K/F₀)/√t.
//!
//! Conditional on S_t = z the log-forward is Gaussian, so the ATS price is
//! the expectation over S_t of a Black-like closed form
//!
//! ```text
//! c(z) = e^{φt − tσ̄²ηz}·N(−y/(σ̄√z) + l + w) − e^{y√t}·N(−y/(σ̄√z) + l − w)
//! l    = −σ̄η√(zt) + φ√t/(σ̄√z),   w = σ̄√(zt)/2
//! ```
//!
//! Both terms are nearly equal for short maturities; they are recombined as
//! e^{x}·(N(a) − N(b)) + e^{x}·expm1(E − x)·N(a) so that neither the CDF
//! difference nor the exponential difference cancels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AtsError, Result};
use crate::model::AtsParams;
use crate::quadrature::QuadConfig;
use crate::special::{normal_cdf, normal_cdf_diff, normal_pdf};
use crate::subordinator::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

/// Maturity, moneyness degree and payoff type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub t: f64,
    pub y: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(t: f64, y: f64, kind: OptionKind) -> Self {
        Self { t, y, kind }
    }

    pub fn call(t: f64, y: f64) -> Self {
        Self::new(t, y, OptionKind::Call)
    }

    pub fn put(t: f64, y: f64) -> Self {
        Self::new(t, y, OptionKind::Put)
    }

    /// Log-moneyness x = y√t.
    pub fn log_moneyness(&self) -> f64 {
        self.y * self.t.sqrt()
    }

    /// Open interval of arbitrage-free prices.
    pub fn price_bounds(&self) -> (f64, f64) {
        let ex = self.log_moneyness().exp();
        match self.kind {
            OptionKind::Call => ((-self.log_moneyness().exp_m1()).max(0.0), 1.0),
            OptionKind::Put => (self.log_moneyness().exp_m1().max(0.0), ex),
        }
    }

    /// Intrinsic value, (1 − e^x)^+ or (e^x − 1)^+.
    pub fn intrinsic(&self) -> f64 {
        self.price_bounds().0
    }
}

/// Price with the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub price: f64,
    pub abs_error: f64,
}

/// Monte Carlo price with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
}

/// l_t^z = −σ̄η_t√(zt) + φ_t√t/(σ̄√z).
pub fn l_term(z: f64, t: f64, params: &AtsParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(AtsError::Domain(format!("l_term requires z > 0, got {z}")));
    }
    Ok(l_term_with(z, t, params, params.phi(t)?))
}

fn l_term_with(z: f64, t: f64, params: &AtsParams, phi: f64) -> f64 {
    let sb = params.sigma_bar;
    -sb * params.eta_t(t) * (z * t).sqrt() + phi * t.sqrt() / (sb * z.sqrt())
}

/// Black price with volatility `vol` in moneyness-degree coordinates:
/// call N(−y/v + v√t/2) − e^{y√t}·N(−y/v − v√t/2), put by symmetry.
pub fn black_price(vol: f64, spec: &OptionSpec) -> f64 {
    let x = spec.log_moneyness();
    let ex = x.exp();
    let sd = vol * spec.t.sqrt();
    let m = -spec.y / vol;
    let a = m + sd / 2.0;
    let b = m - sd / 2.0;
    match spec.kind {
        OptionKind::Call => ex * normal_cdf_diff(a, b) - x.exp_m1() * normal_cdf(a),
        OptionKind::Put => ex * normal_cdf_diff(-b, -a) + x.exp_m1() * normal_cdf(-a),
    }
}

/// ∂(black price)/∂vol, identical for calls and puts.
pub fn black_vega(vol: f64, spec: &OptionSpec) -> f64 {
    let sd = vol * spec.t.sqrt();
    normal_pdf(-spec.y / vol + sd / 2.0) * spec.t.sqrt()
}

/// Precomputed per-maturity quantities for the conditional prices.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ConditionalPricer {
    t: f64,
    sigma_bar: f64,
    eta: f64,
    phi_t: f64,
    phi: f64,
}

impl ConditionalPricer {
    pub(crate) fn new(t: f64, params: &AtsParams) -> Result<Self> {
        let phi_t = params.drift_times_t(t)?;
        Ok(Self {
            t,
            sigma_bar: params.sigma_bar,
            eta: params.eta_t(t),
            phi_t,
            phi: phi_t / t,
        })
    }

    pub(crate) fn l(&self, z: f64) -> f64 {
        let sb = self.sigma_bar;
        -sb * self.eta * (z * self.t).sqrt() + self.phi * self.t.sqrt() / (sb * z.sqrt())
    }

    pub(crate) fn half_width(&self, z: f64) -> f64 {
        self.sigma_bar * (z * self.t).sqrt() / 2.0
    }

    /// z at which l vanishes.
    pub(crate) fn drift_ratio(&self) -> f64 {
        self.phi / (self.sigma_bar.powi(2) * self.eta)
    }

    pub(crate) fn payoff(&self, z: f64, y: f64, kind: OptionKind) -> f64 {
        let x = y * self.t.sqrt();
        let ex = x.exp();
        let expo = self.phi_t - self.t * self.sigma_bar.powi(2) * self.eta * z;
        let m = -y / (self.sigma_bar * z.sqrt()) + self.l(z);
        let w = self.half_width(z);
        let (a, b) = (m + w, m - w);
        let gap = (expo - x).exp_m1();
        let v = match kind {
            OptionKind::Call => ex * normal_cdf_diff(a, b) + ex * gap * normal_cdf(a),
            OptionKind::Put => ex * normal_cdf_diff(-b, -a) - ex * gap * normal_cdf(-a),
        };
        if v.is_nan() {
            v
        } else {
            v.max(0.0)
        }
    }
}

/// The conditional call or put price given S_t = z.
pub fn conditional_payoff(z: f64, spec: &OptionSpec, params: &AtsParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(AtsError::Domain(format!("conditional payoff requires z > 0, got {z}")));
    }
    Ok(ConditionalPricer::new(spec.t, params)?.payoff(z, spec.y, spec.kind))
}

/// Default tolerances for price integrals.
pub fn price_quad_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-16,
        rel_tol: 1e-12,
        max_intervals: 6000,
    }
}

/// E[conditional payoff at S_t] by adaptive quadrature over the law of S_t,
/// with breakpoints at z = 1 and z = φ_t/(σ̄²η_t).
pub fn price_quadrature(spec: &OptionSpec, params: &AtsParams) -> Result<PriceEstimate> {
    price_quadrature_with(spec, params, price_quad_config())
}

pub fn price_quadrature_with(spec: &OptionSpec, params: &AtsParams, cfg: QuadConfig) -> Result<PriceEstimate> {
    let law = params.law(spec.t)?;
    let cp = ConditionalPricer::new(spec.t, params)?;
    let est = law.expectation(|z| cp.payoff(z, spec.y, spec.kind), &[1.0, cp.drift_ratio()], cfg)?;
    Ok(PriceEstimate {
        price: est.value,
        abs_error: est.abs_error,
    })
}

/// Paths per Monte Carlo shard; shard `i` uses seed `derive_seed(seed, i)`.
pub const MC_SHARD_PATHS: usize = 1 << 16;

/// Monte Carlo price from draws of f_t, sharded over threads.
///
/// The result depends only on (`spec`, `params`, `paths`, `seed`), not on the
/// thread count.
pub fn price_mc(spec: &OptionSpec, params: &AtsParams, paths: usize, seed: u64) -> Result<McEstimate> {
    if paths == 0 {
        return Err(AtsError::Domain("paths must be at least 1".into()));
    }
    let x = spec.log_moneyness();
    let ex = x.exp();
    let shards = paths.div_ceil(MC_SHARD_PATHS);
    let partial: Vec<Result<(f64, f64)>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let n = MC_SHARD_PATHS.min(paths - i * MC_SHARD_PATHS);
            let draws = params.sample_log_forward(spec.t, n, derive_seed(seed, i as u64))?;
            let mut s = 0.0;
            let mut s2 = 0.0;
            for f in draws {
                let v = match spec.kind {
                    OptionKind::Call => (f.exp() - ex).max(0.0),
                    OptionKind::Put => (ex - f.exp()).max(0.0),
                };
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for r in partial {
        let (a, b) = r?;
        s += a;
        s2 += b;
    }
    let n = paths as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    Ok(McEstimate {
        price: mean,
        std_error: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case5() -> AtsParams {
        AtsParams::new(0.0, 1.0, -0.5, 1.0, 1.0, 0.2)
    }

    #[test]
    fn black_atm_example() {
        let spec = OptionSpec::call(1.0, 0.0);
        let v = black_price(0.2, &spec);
        assert!((v - (normal_cdf(0.1) - normal_cdf(-0.1))).abs() < 1e-15);
        assert!((v - 0.079_655_674_554_057_9).abs() < 1e-12);
    }

    #[test]
    fn black_parity() {
        for &(t, y, vol) in &[(0.5, 0.3, 0.2), (1e-4, -2.0, 0.5), (2.0, 1.0, 1.5)] {
            let c = black_price(vol, &OptionSpec::call(t, y));
            let p = black_price(vol, &OptionSpec::put(t, y));
            let x: f64 = y * f64::sqrt(t);
            assert!((c - p - (1.0 - x.exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn l_term_vanishes_at_drift_ratio() {
        let params = case5();
        let t = 0.01;
        let z = params.drift_ratio(t).unwrap();
        assert!(l_term(z, t, &params).unwrap().abs() < 1e-15);
        assert!(l_term(0.0, t, &params).is_err());
    }

    #[test]
    fn conditional_call_minus_put() {
        let params = case5();
        let t = 0.05;
        let phi_t = params.drift_times_t(t).unwrap();
        for &z in &[0.01, 0.5, 1.0, 3.0, 40.0] {
            for &y in &[-1.0, 0.0, 0.7] {
                let c = conditional_payoff(z, &OptionSpec::call(t, y), &params).unwrap();
                let p = conditional_payoff(z, &OptionSpec::put(t, y), &params).unwrap();
                let x: f64 = y * f64::sqrt(t);
                let expected = (phi_t - t * 0.04 * params.eta_t(t) * z).exp() - x.exp();
                assert!((c - p - expected).abs() < 1e-14, "z {z} y {y}");
            }
        }
    }

    #[test]
    fn conditional_call_at_drift_ratio() {
        // With l = 0 and y = 0 the conditional call collapses to 2N(w) − 1.
        let params = case5();
        let t = 0.02;
        let z = params.drift_ratio(t).unwrap();
        let c = conditional_payoff(z, &OptionSpec::call(t, 0.0), &params).unwrap();
        let w = 0.2 * (z * t).sqrt() / 2.0;
        assert!((c - (2.0 * normal_cdf(w) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn mc_is_deterministic() {
        let params = case5();
        let spec = OptionSpec::call(0.1, 0.0);
        let a = price_mc(&spec, &params, 10_000, 5).unwrap();
        let b = price_mc(&spec, &params, 10_000, 5).unwrap();
        assert_eq!(a, b);
    }
}
