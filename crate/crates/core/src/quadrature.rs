//! Globally adaptive Gauss–Kronrod (10/21) integration.
//!
//! Intervals are kept in a max-heap keyed by their error estimate; the worst
//! interval is bisected until the summed error meets the tolerance or the
//! interval budget runs out. Breakpoints seed the heap so that known features
//! of an integrand (peaks, kinks, sign changes) are never straddled by the
//! first rule application.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{AtsError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// An integral estimate together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error: 0.0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
        }
    }
}

/// Tolerances and interval budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Applies the 21-point Kronrod rule on `[a, b]`, returning the Kronrod value
/// and the QUADPACK-style error estimate.
pub fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut fv = [(0.0, 0.0); 10];
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (result, err)
}

/// Nodes of the 21-point Kronrod rule on `[a, b]` as
/// (abscissa, Kronrod weight, embedded Gauss weight); the Gauss weight is zero
/// at Kronrod-only nodes.
pub fn kronrod_21_nodes(a: f64, b: f64) -> [(f64, f64, f64); 21] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, WGK[10] * half, 0.0); 21];
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let wg = if j % 2 == 1 { WG[j / 2] * half } else { 0.0 };
        out[2 * j] = (center - half * x, w * half, wg);
        out[2 * j + 1] = (center + half * x, w * half, wg);
    }
    out
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<Estimate> {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// bisection with every panel between consecutive breakpoints.
///
/// Breakpoints must be nondecreasing; empty panels are skipped.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: QuadConfig,
) -> Result<Estimate> {
    let heap = refine(&f, points, cfg)?;
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Estimate { value, abs_error })
}

/// Runs the adaptive refinement for `f` and returns the final panels, sorted,
/// so that the same rule can be applied to related integrands with
/// [`apply_panels`].
pub fn adaptive_panels<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: QuadConfig,
) -> Result<Vec<(f64, f64)>> {
    let mut panels: Vec<(f64, f64)> = refine(&f, points, cfg)?.iter().map(|p| (p.a, p.b)).collect();
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(panels)
}

/// Sums the 21-point Kronrod rule of `f` over fixed panels.
pub fn apply_panels<F: Fn(f64) -> f64>(f: F, panels: &[(f64, f64)]) -> Estimate {
    panels.iter().fold(Estimate::zero(), |acc, &(a, b)| {
        let (value, abs_error) = gauss_kronrod_21(&f, a, b);
        acc + Estimate { value, abs_error }
    })
}

fn refine<F: Fn(f64) -> f64>(f: &F, points: &[f64], cfg: QuadConfig) -> Result<BinaryHeap<Panel>> {
    let mut heap = BinaryHeap::new();
    if points.len() < 2 {
        return Ok(heap);
    }
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (v, e) = gauss_kronrod_21(f, a, b);
        total += v;
        total_err += e;
        heap.push(Panel {
            a,
            b,
            value: v,
            error: e,
        });
    }
    if !total.is_finite() {
        return Err(AtsError::Quadrature {
            lower: points[0],
            upper: points[points.len() - 1],
            estimate: total,
            achieved: f64::INFINITY,
            requested: cfg.target(0.0),
        });
    }
    let mut intervals = heap.len();
    while total_err > cfg.target(total) {
        if intervals >= cfg.max_intervals {
            return Err(AtsError::Quadrature {
                lower: points[0],
                upper: points[points.len() - 1],
                estimate: total,
                achieved: total_err,
                requested: cfg.target(total),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || worst.error == 0.0 {
            // Interval exhausted at machine resolution; keep its estimate.
            total_err -= worst.error;
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            if heap.peek().is_some_and(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gauss_kronrod_21(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }
    Ok(heap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        // A 21-point Kronrod rule integrates polynomials of degree 31 exactly.
        for deg in [0u32, 1, 5, 20, 31] {
            let (v, _) = gauss_kronrod_21(&|x: f64| x.powi(deg as i32), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "degree {deg}: {v}");
        }
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let s: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((s - 2.0).abs() < 1e-15);
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_endpoint_singularity() {
        let est = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadConfig::new(1e-12, 1e-12)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_capture_narrow_peak() {
        let f = |x: f64| (-(x - 3.0).powi(2) / 2e-6).exp();
        let exact = (2.0 * std::f64::consts::PI * 1e-6).sqrt();
        let est = integrate_with_breaks(f, &[-50.0, 2.99, 3.01, 50.0], QuadConfig::default()).unwrap();
        assert!((est.value - exact).abs() < 1e-12);
    }

    #[test]
    fn fixed_panels_reproduce_adaptive_result() {
        let f = |x: f64| (-x * x).exp();
        let panels = adaptive_panels(f, &[-8.0, 0.0, 8.0], QuadConfig::default()).unwrap();
        let est = apply_panels(|x: f64| x * x * (-x * x).exp(), &panels);
        assert!((est.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn node_table_matches_rule() {
        let f = |x: f64| x.sin() + x * x;
        let (v, _) = gauss_kronrod_21(&f, 0.2, 1.7);
        let nodes = kronrod_21_nodes(0.2, 1.7);
        let k: f64 = nodes.iter().map(|&(x, w, _)| w * f(x)).sum();
        let g: f64 = nodes.iter().map(|&(x, _, w)| w * f(x)).sum();
        assert!((k - v).abs() < 1e-15);
        assert!((g - v).abs() < 1e-9);
    }

    #[test]
    fn reports_nonconvergence() {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, cfg).unwrap_err();
        assert!(matches!(err, AtsError::Quadrature { .. }));
    }
}
