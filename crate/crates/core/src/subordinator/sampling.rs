//! Exact and tabulated samplers for S_t.
//!
//! * α = 0: Gamma(θ, 1/θ). For θ < 1 the draw is made in log space as
//!   ln G(θ+1) + ln(U)/θ so that extremely small values do not collapse to 0
//!   before the final exponentiation.
//! * α = 1/2: the Michael–Schucany–Haas transformation for IG(1, θ), with the
//!   smaller root written as 4θy/(√(4θy + y²) + y)² to avoid cancellation when
//!   θ ≪ y.
//! * other α: inversion of a monotone-cubic table of ln z against the CDF.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{LawFamily, SubordinatorLaw};
use crate::error::{AtsError, Result};
use crate::quadrature::QuadConfig;

/// Knots in the inverse-CDF table.
pub const TABLE_KNOTS: usize = 4096;
/// Probability left outside the table at each end.
pub const TABLE_TAIL_PROBABILITY: f64 = 1e-9;

// 5-point Gauss–Legendre on [−1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Gamma,
    InverseGaussian,
    TabulatedInverse,
}

/// Samples together with the information needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub method: SamplingMethod,
    pub seed: u64,
    /// Discrepancy between the tabulated CDF and an adaptive reference at
    /// the table's right end; `None` for exact samplers.
    pub table_tolerance: Option<f64>,
}

/// SplitMix64 mix of a base seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sample(law: &SubordinatorLaw, count: usize, seed: u64) -> Result<SampleBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = law.theta();
    match law.family() {
        LawFamily::Gamma => {
            let values = if theta >= 1.0 {
                let g = Gamma::new(theta, 1.0 / theta)
                    .map_err(|e| AtsError::InvalidParams(e.to_string()))?;
                (0..count).map(|_| g.sample(&mut rng)).collect()
            } else {
                let g = Gamma::new(theta + 1.0, 1.0)
                    .map_err(|e| AtsError::InvalidParams(e.to_string()))?;
                (0..count)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let ln_v = g.sample(&mut rng).ln() + (1.0 - u).ln() / theta - theta.ln();
                        ln_v.exp().max(f64::MIN_POSITIVE)
                    })
                    .collect()
            };
            Ok(SampleBatch {
                values,
                method: SamplingMethod::Gamma,
                seed,
                table_tolerance: None,
            })
        }
        LawFamily::InverseGaussian => {
            let values = (0..count).map(|_| inverse_gaussian(theta, &mut rng)).collect();
            Ok(SampleBatch {
                values,
                method: SamplingMethod::InverseGaussian,
                seed,
                table_tolerance: None,
            })
        }
        LawFamily::TemperedStable => {
            let table = InverseTable::build(law)?;
            let values = (0..count).map(|_| table.draw(rng.random())).collect();
            Ok(SampleBatch {
                values,
                method: SamplingMethod::TabulatedInverse,
                seed,
                table_tolerance: Some(table.tolerance),
            })
        }
    }
}

/// IG(mean 1, shape θ).
fn inverse_gaussian<R: Rng>(theta: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    let y = v * v;
    let r = (4.0 * theta * y + y * y).sqrt();
    let x = 4.0 * theta * y / ((r + y) * (r + y));
    if x == 0.0 {
        // y = 0: both roots coincide at the mean.
        return 1.0;
    }
    let u: f64 = rng.random();
    if u * (1.0 + x) <= 1.0 {
        x
    } else {
        1.0 / x
    }
}

struct InverseTable {
    probs: Vec<f64>,
    logs: Vec<f64>,
    slopes: Vec<f64>,
    tolerance: f64,
}

impl InverseTable {
    fn build(law: &SubordinatorLaw) -> Result<Self> {
        let (lo, hi) = law.log_support();
        let breaks = law.log_breaks(&[]);
        let cfg = QuadConfig::new(1e-16, 1e-11);
        let s_a = quantile_log(law, TABLE_TAIL_PROBABILITY, lo, hi, &breaks, cfg)?;
        let s_b = quantile_log(law, 1.0 - TABLE_TAIL_PROBABILITY, lo, hi, &breaks, cfg)?;
        let reference = law.integrate_log_window(s_a, s_b, &breaks, cfg)?;

        let h = (s_b - s_a) / (TABLE_KNOTS - 1) as f64;
        let kernel = law.stable_kernel();
        let increments: Vec<f64> = (0..TABLE_KNOTS - 1)
            .into_par_iter()
            .map(|k| {
                let worst = std::cell::Cell::new(0.0);
                let mid = s_a + (k as f64 + 0.5) * h;
                GL5_X
                    .iter()
                    .zip(GL5_W)
                    .map(|(&x, w)| w * law.log_z_density(mid + 0.5 * h * x, kernel.as_ref(), &worst).exp())
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .collect();

        let mut probs = Vec::with_capacity(TABLE_KNOTS);
        let mut logs = Vec::with_capacity(TABLE_KNOTS);
        let mut acc = TABLE_TAIL_PROBABILITY;
        probs.push(acc);
        logs.push(s_a);
        for (k, inc) in increments.iter().enumerate() {
            acc += inc;
            let s = s_a + (k + 1) as f64 * h;
            if acc > *probs.last().unwrap() {
                probs.push(acc);
                logs.push(s);
            } else {
                // Flat CDF cell: keep the later abscissa.
                *logs.last_mut().unwrap() = s;
            }
        }
        let tolerance = (acc - TABLE_TAIL_PROBABILITY - reference).abs();
        let slopes = fritsch_carlson(&probs, &logs);
        Ok(Self {
            probs,
            logs,
            slopes,
            tolerance,
        })
    }

    fn draw(&self, u: f64) -> f64 {
        let n = self.probs.len();
        if u <= self.probs[0] {
            return self.logs[0].exp();
        }
        if u >= self.probs[n - 1] {
            return self.logs[n - 1].exp();
        }
        let i = self.probs.partition_point(|&p| p <= u) - 1;
        let (x0, x1) = (self.probs[i], self.probs[i + 1]);
        let (y0, y1) = (self.logs[i], self.logs[i + 1]);
        let h = x1 - x0;
        let t = (u - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let s = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * self.slopes[i + 1];
        s.exp()
    }
}

/// Monotone Hermite slopes (Fritsch–Carlson).
fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        m[i] = if secant[i - 1] * secant[i] <= 0.0 {
            0.0
        } else {
            0.5 * (secant[i - 1] + secant[i])
        };
    }
    for i in 0..n - 1 {
        if secant[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / secant[i];
        let b = m[i + 1] / secant[i];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * secant[i];
            m[i + 1] = tau * b * secant[i];
        }
    }
    m
}

/// ln of the p-quantile: cumulative panel sums locate the bracket, then a
/// safeguarded Newton iteration (F′(s) = z·p(z)) refines inside it.
fn quantile_log(
    law: &SubordinatorLaw,
    p: f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    cfg: QuadConfig,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut a = lo;
    let mut b = hi;
    let mut base = 0.0;
    for w in breaks.windows(2) {
        let mass = law.integrate_log_window(w[0], w[1], &[], cfg)?;
        if acc + mass >= p {
            a = w[0];
            b = w[1];
            base = acc;
            break;
        }
        acc += mass;
    }
    let kernel = law.stable_kernel();
    let worst = std::cell::Cell::new(0.0);
    let (mut left, mut right) = (a, b);
    let mut s = 0.5 * (a + b);
    for _ in 0..60 {
        let f = base + law.integrate_log_window(a, s, &[], cfg)? - p;
        if f.abs() < 1e-14 || right - left < 1e-13 {
            break;
        }
        if f > 0.0 {
            right = s;
        } else {
            left = s;
        }
        let slope = law.log_z_density(s, kernel.as_ref(), &worst).exp();
        let newton = s - f / slope;
        s = if slope > 0.0 && newton > left && newton < right {
            newton
        } else {
            0.5 * (left + right)
        };
    }
    Ok(s)
}
