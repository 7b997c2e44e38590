//! Implied volatility, ATM level and skew term of the ATS smile, their
//! short-time limits, and the limit-skew surface for β = 1, δ = −1/2.
//!
//! The skew term is ξ̂_t = d𝓘_t/dy at y = 0. Differentiating the implied
//! volatility equation at the money gives the closed expression
//!
//! ```text
//! ξ̂_t = [N(−σ̂_t√t/2) − E[N(l_t^S − σ̄√(S t)/2)]] / N′(−σ̂_t√t/2)
//! ```
//!
//! For β = 1, δ = −1/2 the law of S_t does not depend on t and the limit is
//! ξ̂₀ = −√(π/2)·E[erf(σ̄η̄·(1/√S − √S)/√2)].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AtsError, Result};
use crate::model::AtsParams;
use crate::pricer::{black_price, black_vega, price_quadrature, ConditionalPricer, OptionKind, OptionSpec};
use crate::quadrature::QuadConfig;
use crate::special::{erf, normal_cdf_diff, normal_pdf};
use crate::subordinator::SubordinatorLaw;

/// Lower end of the initial volatility bracket.
pub const VOL_LOWER: f64 = 1e-8;
/// Upper end of the initial volatility bracket.
pub const VOL_UPPER: f64 = 5.0;
/// Largest volatility the bracket may be expanded to.
pub const VOL_CEILING: f64 = 10.0;
/// Termination threshold on the volatility update.
pub const VOL_STEP_TOLERANCE: f64 = 1e-10;

/// One solved point of the smile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmilePoint {
    pub t: f64,
    pub y: f64,
    pub price: f64,
    pub implied_vol: f64,
    /// |black_price(implied_vol) − price|.
    pub achieved_tol: f64,
}

/// Black volatility reproducing `price` for `spec`.
///
/// Safeguarded Newton iteration inside a sign-changing bracket that starts at
/// [1e−8, 5]; the upper end doubles up to 10 before the search gives up.
pub fn implied_vol(price: f64, spec: &OptionSpec) -> Result<f64> {
    let (lower, upper) = spec.price_bounds();
    if !(price > lower && price < upper) {
        return Err(AtsError::PriceOutOfBounds { price, lower, upper });
    }
    let f = |v: f64| black_price(v, spec) - price;

    let mut hi = VOL_UPPER;
    while f(hi) < 0.0 {
        if hi >= VOL_CEILING {
            return Err(AtsError::BracketExpansion { max_vol: VOL_CEILING });
        }
        hi = (2.0 * hi).min(VOL_CEILING);
    }
    let mut lo = VOL_LOWER;
    while f(lo) > 0.0 {
        // Prices just above intrinsic need volatilities below the default floor.
        lo *= 1e-2;
        if lo < 1e-300 {
            return Ok(lo);
        }
    }

    let mut v = if spec.y == 0.0 {
        // ATM: invert the leading-order expansion price ≈ v√(t/2π).
        (price * (2.0 * PI / spec.t).sqrt()).clamp(lo, hi)
    } else {
        (lo * hi).sqrt()
    };
    for _ in 0..200 {
        let fv = f(v);
        if fv == 0.0 {
            return Ok(v);
        }
        if fv > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let vega = black_vega(v, spec);
        let newton = v - fv / vega;
        let next = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (next - v).abs() < VOL_STEP_TOLERANCE || hi - lo < VOL_STEP_TOLERANCE * 1e-3 {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

/// Solves the smile at one (t, y), pricing the out-of-the-money option.
pub fn smile_point(t: f64, y: f64, params: &AtsParams) -> Result<SmilePoint> {
    let spec = if y < 0.0 { OptionSpec::put(t, y) } else { OptionSpec::call(t, y) };
    let price = price_quadrature(&spec, params)?.price;
    let vol = implied_vol(price, &spec)?;
    Ok(SmilePoint {
        t,
        y,
        price,
        implied_vol: vol,
        achieved_tol: (black_price(vol, &spec) - price).abs(),
    })
}

/// σ̂_t, the implied volatility of the ATM call.
pub fn atm_vol(t: f64, params: &AtsParams) -> Result<f64> {
    atm_vol_of(OptionKind::Call, t, params)
}

/// ATM implied volatility computed from either the call or the put.
pub fn atm_vol_of(kind: OptionKind, t: f64, params: &AtsParams) -> Result<f64> {
    let spec = OptionSpec::new(t, 0.0, kind);
    implied_vol(price_quadrature(&spec, params)?.price, &spec)
}

fn skew_quad_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 6000,
    }
}

/// Closed-form skew term ξ̂_t with σ̂_t from [`atm_vol`].
pub fn skew_term_closed(t: f64, params: &AtsParams) -> Result<f64> {
    let sigma = atm_vol(t, params)?;
    skew_term_given_atm(t, sigma, params)
}

/// Closed-form skew term for a known ATM volatility.
pub fn skew_term_given_atm(t: f64, atm: f64, params: &AtsParams) -> Result<f64> {
    let law = params.law(t)?;
    let cp = ConditionalPricer::new(t, params)?;
    let h = -atm * t.sqrt() / 2.0;
    // The numerator is written as E[N(h) − N(l − w)] so it is integrated
    // without the O(1) cancellation between its two terms.
    let num = law.expectation(
        |z| normal_cdf_diff(h, cp.l(z) - cp.half_width(z)),
        &[1.0, cp.drift_ratio()],
        skew_quad_config(),
    )?;
    Ok(num.value / normal_pdf(h))
}

/// Default finite-difference step in y: 1e−4, or 1e−3 below t = 1e−6.
pub fn default_fd_step(t: f64) -> f64 {
    if t < 1e-6 {
        1e-3
    } else {
        1e-4
    }
}

/// Central difference of 𝓘_t(y) at y = 0 with one Richardson step (h, h/2).
pub fn skew_term_fd(t: f64, params: &AtsParams, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(AtsError::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let vol = |y: f64| smile_point(t, y, params).map(|p| p.implied_vol);
    let central = |h: f64| -> Result<f64> { Ok((vol(h)? - vol(-h)?) / (2.0 * h)) };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// dI_t/dx at x = 0 by finite differences in log-moneyness x = y√t.
pub fn skew_x_fd(t: f64, params: &AtsParams, hx: f64) -> Result<f64> {
    if !(hx > 0.0) {
        return Err(AtsError::Domain(format!("finite-difference step must be positive, got {hx}")));
    }
    let rt = t.sqrt();
    let vol = |x: f64| smile_point(t, x / rt, params).map(|p| p.implied_vol);
    let central = |h: f64| -> Result<f64> { Ok((vol(h)? - vol(-h)?) / (2.0 * h)) };
    let d1 = central(hx)?;
    let d2 = central(hx / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Law of S_t for β = 1, identical for every t.
fn scale_invariant_law(params: &AtsParams) -> Result<SubordinatorLaw> {
    SubordinatorLaw::new(params.alpha, 1.0, params.k_bar)
}

/// Points z where c·(1/√z − √z) = k for k ∈ {±1, ±3}, the transition band of
/// the erf integrand.
fn erf_landmarks(c: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    if c > 0.0 {
        for k in [-3.0, -1.0, 1.0, 3.0] {
            let r: f64 = k / c;
            let u = (-r + (r * r + 4.0).sqrt()) / 2.0;
            out.push(u * u);
        }
    }
    out
}

fn limit_integrand(c: f64) -> impl Fn(f64) -> f64 {
    move |z: f64| erf(c * (1.0 / z.sqrt() - z.sqrt()))
}

/// Short-time skew limit ξ̂₀ for β = 1, δ = −1/2.
pub fn skew_limit_case5(params: &AtsParams) -> Result<f64> {
    if params.beta != 1.0 || params.delta != -0.5 {
        return Err(AtsError::WrongRegime(format!(
            "skew limit formula needs beta = 1 and delta = -1/2, got beta = {}, delta = {}",
            params.beta, params.delta
        )));
    }
    let c = params.sigma_bar * params.eta_bar * FRAC_1_SQRT_2;
    let law = scale_invariant_law(params)?;
    let est = law.expectation(limit_integrand(c), &erf_landmarks(c), skew_quad_config())?;
    Ok(-(PI / 2.0).sqrt() * est.value)
}

/// One row of the limit-skew surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub alpha: f64,
    pub k_bar: f64,
    pub sigma_eta: f64,
    pub xi0: f64,
}

/// Accuracy demanded of each surface point before the fixed rule is trusted.
const SURFACE_POINT_TOLERANCE: f64 = 1e-9;

/// ξ̂₀ over α × k̄ × σ̄η̄, in that nesting order.
///
/// Points sharing (α, k̄) share one law; a quadrature rule is frozen per law
/// and reused across σ̄η̄, falling back to adaptive integration for any point
/// whose embedded error estimate is too large.
pub fn skew_surface(alphas: &[f64], k_grid: &[f64], se_grid: &[f64]) -> Result<Vec<SurfaceRow>> {
    let laws: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| k_grid.iter().map(move |&k| (a, k)))
        .collect();
    let blocks: Vec<Result<Vec<SurfaceRow>>> = laws
        .par_iter()
        .map(|&(alpha, k_bar)| surface_block(alpha, k_bar, se_grid))
        .collect();
    let mut rows = Vec::with_capacity(laws.len() * se_grid.len());
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

fn surface_block(alpha: f64, k_bar: f64, se_grid: &[f64]) -> Result<Vec<SurfaceRow>> {
    let law = SubordinatorLaw::new(alpha, 1.0, k_bar)?;
    let (se_min, se_max) = se_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let c_lo = se_min * FRAC_1_SQRT_2;
    let c_hi = se_max * FRAC_1_SQRT_2;
    let mut landmarks = erf_landmarks(c_lo);
    landmarks.extend(erf_landmarks(c_hi));
    let reference = |z: f64| 1.0 + limit_integrand(c_lo)(z).abs() + limit_integrand(c_hi)(z).abs();
    let rule = law.expectation_rule(reference, &landmarks, skew_quad_config())?;
    se_grid
        .iter()
        .map(|&se| {
            let c = se * FRAC_1_SQRT_2;
            let est = rule.expect(limit_integrand(c));
            let value = if est.abs_error <= SURFACE_POINT_TOLERANCE {
                est.value
            } else {
                law.expectation(limit_integrand(c), &erf_landmarks(c), skew_quad_config())?
                    .value
            };
            Ok(SurfaceRow {
                alpha,
                k_bar,
                sigma_eta: se,
                xi0: -(PI / 2.0).sqrt() * value,
            })
        })
        .collect()
}

/// Quantity tracked by [`short_time_extrapolate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortTimeQuantity {
    AtmVol,
    SkewTerm,
}

/// Classification thresholds for [`short_time_extrapolate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationConfig {
    /// "Vanishing" needs |last| < vanish_ratio·|first| ...
    pub vanish_ratio: f64,
    /// ... and a fitted log-log slope above this.
    pub vanish_slope: f64,
    /// "Diverging" needs |last| > diverge_ratio·|first|.
    pub diverge_ratio: f64,
}

impl Default for ExtrapolationConfig {
    fn default() -> Self {
        Self {
            vanish_ratio: 0.02,
            vanish_slope: 0.1,
            diverge_ratio: 50.0,
        }
    }
}

/// Short-time behavior inferred from a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitEstimate {
    /// Aitken-accelerated limit.
    Converging { limit: f64 },
    /// Decays like t^power.
    Vanishing { power: f64 },
    /// Grows like t^power (power < 0), or left the solvable volatility range.
    Diverging { power: f64 },
    Inconclusive,
}

/// Sequence and verdict of a short-time study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub estimate: LimitEstimate,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// The sequence stopped early because the implied volatility exceeded
    /// the solver ceiling.
    pub hit_vol_ceiling: bool,
}

pub fn short_time_extrapolate(
    params: &AtsParams,
    quantity: ShortTimeQuantity,
    t0: f64,
    levels: usize,
) -> Result<Extrapolation> {
    short_time_extrapolate_with(params, quantity, t0, levels, ExtrapolationConfig::default())
}

/// Evaluates `quantity` at t_k = t0·2^{−k}, k < `levels`, and classifies the
/// sequence.
pub fn short_time_extrapolate_with(
    params: &AtsParams,
    quantity: ShortTimeQuantity,
    t0: f64,
    levels: usize,
    cfg: ExtrapolationConfig,
) -> Result<Extrapolation> {
    if levels < 4 {
        return Err(AtsError::Domain(format!("at least 4 levels are needed, got {levels}")));
    }
    let mut times = Vec::with_capacity(levels);
    let mut values = Vec::with_capacity(levels);
    let mut hit_vol_ceiling = false;
    for k in 0..levels {
        let t = t0 * 0.5f64.powi(k as i32);
        let v = match quantity {
            ShortTimeQuantity::AtmVol => atm_vol(t, params),
            ShortTimeQuantity::SkewTerm => skew_term_closed(t, params),
        };
        match v {
            Ok(v) => {
                times.push(t);
                values.push(v);
            }
            Err(AtsError::BracketExpansion { .. }) if values.len() >= 3 => {
                hit_vol_ceiling = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let estimate = classify_sequence(&times, &values, hit_vol_ceiling, &cfg);
    Ok(Extrapolation {
        estimate,
        times,
        values,
        hit_vol_ceiling,
    })
}

fn classify_sequence(times: &[f64], values: &[f64], hit_ceiling: bool, cfg: &ExtrapolationConfig) -> LimitEstimate {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let n = mags.len();
    let first = mags[0];
    let last = mags[n - 1];
    let slope = loglog_slope(times, &mags);
    let increasing = mags.windows(2).all(|w| w[1] >= w[0]);
    if hit_ceiling && increasing {
        return LimitEstimate::Diverging { power: slope };
    }
    if last < cfg.vanish_ratio * first && slope > cfg.vanish_slope {
        return LimitEstimate::Vanishing { power: slope };
    }
    if last > cfg.diverge_ratio * first {
        return LimitEstimate::Diverging { power: slope };
    }
    let rising = values.windows(2).all(|w| w[1] >= w[0]);
    let falling = values.windows(2).all(|w| w[1] <= w[0]);
    if !(rising || falling) {
        return LimitEstimate::Inconclusive;
    }
    let (x0, x1, x2) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = x2 - 2.0 * x1 + x0;
    let limit = if denom == 0.0 {
        x2
    } else {
        x2 - (x2 - x1).powi(2) / denom
    };
    LimitEstimate::Converging { limit }
}

/// Least-squares slope of ln|v| against ln t; NaN if any value is zero.
fn loglog_slope(times: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = times.iter().zip(values).map(|(t, v)| (t.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
