//! Cross-module property suite behind the `validate` subcommand.

use std::f64::consts::SQRT_2;

use atslab_core::pricer::{black_price, conditional_payoff, price_mc, price_quadrature, OptionSpec};
use atslab_core::quadrature::QuadConfig;
use atslab_core::special::normal_cdf;
use atslab_core::subordinator::derive_seed;
use atslab_core::vol_surface::implied_vol;
use atslab_core::{AtsParams, SubordinatorLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{linspace, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One check: passes when `observed ≤ bound + tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub observed: f64,
    pub bound: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: &'static str, observed: f64, bound: f64, tolerance: f64) -> Self {
        let ok = observed <= bound + tolerance;
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            observed,
            bound,
            tolerance,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn failed(name: &'static str, bound: f64, tolerance: f64, err: impl ToString) -> Self {
        Self {
            name,
            status: Status::Fail,
            observed: f64::NAN,
            bound,
            tolerance,
            detail: Some(err.to_string()),
        }
    }

    fn from_result(
        name: &'static str,
        bound: f64,
        tolerance: f64,
        r: atslab_core::Result<f64>,
    ) -> Self {
        match r {
            Ok(v) if v.is_nan() => Self::failed(name, bound, tolerance, "observed value is NaN"),
            Ok(v) => Self::at_most(name, v, bound, tolerance),
            Err(e) => Self::failed(name, bound, tolerance, e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Random parameter set inside the admissible region.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> AtsParams {
    loop {
        let alpha = rng.random_range(0.0..0.95);
        let upper = AtsParams::new(alpha, 0.0, 0.0, 1.0, 1.0, 0.2).beta_upper();
        let beta = rng.random_range(0.0..upper);
        let lower = AtsParams::new(alpha, beta, 0.0, 1.0, 1.0, 0.2).delta_lower();
        let delta = lower * rng.random_range(0.0..0.98);
        let p = AtsParams::new(
            alpha,
            beta,
            delta,
            rng.random_range(0.2..2.0),
            rng.random_range(0.2..2.0),
            rng.random_range(0.1..0.5),
        );
        if p.validate().is_ok() {
            return p;
        }
    }
}

/// |E[e^{f_t}] − 1| with the expectation taken by quadrature over S_t:
/// E[e^{f_t} | S_t = z] = exp(φ_t t − t σ̄² η_t z).
pub fn martingale_defect(p: &AtsParams, t: f64) -> atslab_core::Result<f64> {
    let law = p.law(t)?;
    let phi_t = p.drift_times_t(t)?;
    let c = t * p.sigma_bar.powi(2) * p.eta_t(t);
    let est = law.expectation(|z| (phi_t - c * z).exp(), &[1.0], QuadConfig::default())?;
    Ok((est.value - 1.0).abs())
}

fn martingale(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 100));
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_admissible(&mut rng);
        for t in [1e-3, 1e-1, 1.0] {
            match martingale_defect(&p, t) {
                Ok(d) => worst = worst.max(d),
                Err(e) => return Check::failed("martingale", 1e-8, 0.0, format!("{p:?} t {t}: {e}")),
            }
        }
    }
    Check::at_most("martingale", worst, 1e-8, 0.0).with_detail("20 random admissible sets, t in {1e-3, 0.1, 1}")
}

fn parity(p: &AtsParams) -> Check {
    let run = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        for t in [1e-3, 0.1, 1.0] {
            for y in linspace(-2.0, 2.0, 9) {
                let c = price_quadrature(&OptionSpec::call(t, y), p)?.price;
                let q = price_quadrature(&OptionSpec::put(t, y), p)?.price;
                let x = y * t.sqrt();
                worst = worst.max((c - q + x.exp_m1()).abs());
            }
        }
        Ok(worst)
    };
    Check::from_result("put_call_parity", 1e-9, 0.0, run())
}

fn round_trip(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 101));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let vol: f64 = rng.random_range(0.02..2.0);
        let t = 10f64.powf(rng.random_range(-4.0..0.3));
        let y: f64 = rng.random_range(-3.0..3.0);
        if (y / vol).abs() > 6.0 {
            continue;
        }
        let spec = if y < 0.0 { OptionSpec::put(t, y) } else { OptionSpec::call(t, y) };
        match implied_vol(black_price(vol, &spec), &spec) {
            Ok(v) => worst = worst.max((v - vol).abs()),
            Err(e) => return Check::failed("implied_vol_round_trip", 1e-9, 0.0, e),
        }
        count += 1;
    }
    Check::at_most("implied_vol_round_trip", worst, 1e-9, 0.0)
        .with_detail("1000 out-of-the-money triples within six standard deviations")
}

fn payoff_nonnegative(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 102));
    let zs: Vec<f64> = (0..=27).map(|i| 10f64.powf(-6.0 + i as f64 / 3.0)).collect();
    let mut negatives = 0usize;
    for _ in 0..20 {
        let p = random_admissible(&mut rng);
        for t in [1e-4, 0.1, 1.0] {
            for y in [-3.0, -0.5, 0.0, 0.5, 3.0] {
                for &z in &zs {
                    for spec in [OptionSpec::call(t, y), OptionSpec::put(t, y)] {
                        match conditional_payoff(z, &spec, &p) {
                            Ok(v) if v >= 0.0 => {}
                            Ok(_) => negatives += 1,
                            Err(e) => return Check::failed("conditional_payoff_nonnegative", 0.0, 0.0, e),
                        }
                    }
                }
            }
        }
    }
    Check::at_most("conditional_payoff_nonnegative", negatives as f64, 0.0, 0.0)
        .with_detail("count of negative values, 20 random sets, z in [1e-6, 1e3]")
}

fn laplace_bound() -> Check {
    let run = || -> atslab_core::Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for alpha in [0.0, 0.25, 0.5, 0.9] {
            for theta in [0.1, 1.0, 10.0] {
                let law = SubordinatorLaw::new(alpha, 1.0, 1.0 / theta)?;
                for u in linspace(0.0, 50.0, 101) {
                    let lhs = 1.0 - law.laplace(u)?;
                    for c in [1.0, 2.0] {
                        worst = worst.max(lhs - (1.0 - (-c * u).exp()));
                    }
                }
            }
        }
        Ok(worst)
    };
    Check::from_result("laplace_bound", 0.0, 1e-15, run())
}

fn laplace_monotone() -> Check {
    let run = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        let ts: Vec<f64> = (0..25).map(|i| 10f64.powf(-6.0 + i as f64 / 4.0)).collect();
        for alpha in [0.0, 0.5, 0.7] {
            for beta in [1.0, 1.2] {
                for u in [0.1, 1.0, 10.0] {
                    let mut prev: f64 = 0.0;
                    for &t in &ts {
                        let v = SubordinatorLaw::with_scaling(alpha, t, 1.0, beta)?.laplace(u)?;
                        worst = worst.max(prev - v);
                        prev = v;
                    }
                }
            }
        }
        Ok(worst)
    };
    Check::from_result("laplace_monotone_in_t", 0.0, 1e-15, run())
}

fn drift_ratio(p: &AtsParams, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 103));
    let mut sets = vec![*p];
    sets.extend((0..20).map(|_| random_admissible(&mut rng)));
    let run = || -> atslab_core::Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for q in &sets {
            for k in 0..=22 {
                let t = 10f64.powf(-10.0 + 0.5 * k as f64);
                worst = worst.max(q.drift_ratio(t)?);
            }
        }
        Ok(worst)
    };
    Check::from_result("drift_ratio_bound", 1.0, 1e-15, run())
}

fn sqrt_moment(alpha: f64, t: f64, beta: f64) -> atslab_core::Result<f64> {
    SubordinatorLaw::with_scaling(alpha, t, 1.0, beta)?.fractional_moment(0.5)
}

fn sqrt_moment_checks() -> Vec<Check> {
    let alphas = [0.0, 0.5, 0.3];
    let range = || -> atslab_core::Result<(f64, f64)> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &a in &alphas {
            for t in [1.0, 1e-2, 1e-4] {
                for beta in [0.3, 1.0, 1.5] {
                    let m = sqrt_moment(a, t, beta)?;
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
            }
        }
        Ok((lo, hi))
    };
    let range_check = match range() {
        Ok((lo, _)) if lo < 0.0 => Check::at_most("sqrt_moment_range", -lo, 0.0, 0.0).with_detail("negative moment"),
        Ok((_, hi)) => Check::at_most("sqrt_moment_range", hi, SQRT_2, 0.0),
        Err(e) => Check::failed("sqrt_moment_range", SQRT_2, 0.0, e),
    };
    let sub = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        for &a in &alphas {
            let mut prev = f64::INFINITY;
            for k in 0..=12 {
                let m = sqrt_moment(a, 10f64.powi(-k), 0.5)?;
                if m >= prev {
                    return Ok(f64::INFINITY);
                }
                prev = m;
            }
            worst = worst.max(prev);
        }
        Ok(worst)
    };
    let sup = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        for &a in &alphas {
            worst = worst.max((sqrt_moment(a, 1e-12, 1.5)? - 1.0).abs());
        }
        Ok(worst)
    };
    let lin = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        for &a in &alphas {
            worst = worst.max((sqrt_moment(a, 1e-2, 1.0)? - sqrt_moment(a, 1e-6, 1.0)?).abs());
        }
        Ok(worst)
    };
    vec![
        range_check,
        Check::from_result("sqrt_moment_limit_sublinear", 0.02, 0.0, sub())
            .with_detail("beta = 0.5: decreasing along t = 10^-k, value at t = 1e-12"),
        Check::from_result("sqrt_moment_limit_superlinear", 1e-3, 0.0, sup())
            .with_detail("beta = 1.5: |E[sqrt S] - 1| at t = 1e-12"),
        Check::from_result("sqrt_moment_linear_constant", 1e-12, 0.0, lin())
            .with_detail("beta = 1: |E[sqrt S](1e-2) - E[sqrt S](1e-6)|"),
    ]
}

fn density_sign() -> Check {
    let run = || -> atslab_core::Result<f64> {
        let mut bad = 0usize;
        for alpha in [0.0, 0.5] {
            for k_bar in [0.5, 1.0, 2.0] {
                let law = SubordinatorLaw::new(alpha, 1.0, k_bar)?;
                for z in linspace(0.02, 0.98, 49) {
                    if law.density(z)? - law.density(1.0 / z)? / (z * z) <= 0.0 {
                        bad += 1;
                    }
                }
            }
        }
        Ok(bad as f64)
    };
    Check::from_result("density_sign_inequality", 0.0, 0.0, run())
        .with_detail("count of grid points where p(z) - p(1/z)/z^2 <= 0")
}

/// Largest ratio of the observed Gaussian CDF distance to its bound.
pub fn berry_esseen_ratio() -> atslab_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.5] {
        for beta in [1.0, 1.5] {
            for t in [1e-1, 1e-2, 1e-3] {
                let law = SubordinatorLaw::with_scaling(alpha, t, 1.0, beta)?;
                let scale = law.theta().sqrt();
                let sd = law.variance().sqrt();
                let zs = linspace((1.0 - 6.0 * sd).max(1e-6), 1.0 + 8.0 * sd, 512);
                let mut dist: f64 = 0.0;
                for z in zs {
                    dist = dist.max((law.cdf(z)? - normal_cdf((z - 1.0) * scale)).abs());
                }
                worst = worst.max(dist / law.gaussian_cdf_bound());
            }
        }
    }
    Ok(worst)
}

fn monte_carlo(p: &AtsParams, paths: usize, seed: u64) -> Vec<Check> {
    let spec = OptionSpec::call(0.1, 0.0);
    let q = match price_quadrature(&spec, p) {
        Ok(q) => q.price,
        Err(e) => {
            return vec![
                Check::failed("mc_vs_quadrature", 3.0, 0.0, &e),
                Check::failed("mc_std_error", 5e-4, 0.0, e),
            ]
        }
    };
    match price_mc(&spec, p, paths, seed) {
        Ok(mc) => vec![
            Check::at_most("mc_vs_quadrature", (mc.price - q).abs() / mc.std_error, 3.0, 0.0)
                .with_detail(format!("ATM call t = 0.1, {paths} paths, in standard errors")),
            Check::at_most("mc_std_error", mc.std_error, 5e-4, 0.0),
        ],
        Err(e) => vec![
            Check::failed("mc_vs_quadrature", 3.0, 0.0, &e),
            Check::failed("mc_std_error", 5e-4, 0.0, e),
        ],
    }
}

fn characteristic_function(p: &AtsParams, paths: usize, seed: u64) -> Check {
    let run = || -> atslab_core::Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, t) in [0.01, 0.1, 1.0].into_iter().enumerate() {
            let draws = p.sample_log_forward(t, paths, derive_seed(seed, 200 + i as u64))?;
            let n = draws.len() as f64;
            for u in [-8.0, -2.0, 0.5, 3.0, 10.0] {
                let (mut re, mut im, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
                for &f in &draws {
                    let (s, c) = (u * f).sin_cos();
                    re += c;
                    im += s;
                    re2 += c * c;
                    im2 += s * s;
                }
                let (re, im) = (re / n, im / n);
                let se_re = ((re2 / n - re * re) / n).sqrt().max(1e-300);
                let se_im = ((im2 / n - im * im) / n).sqrt().max(1e-300);
                let cf = p.characteristic_fn(u, t)?;
                worst = worst.max((cf.re - re).abs() / se_re).max((cf.im - im).abs() / se_im);
            }
        }
        Ok(worst)
    };
    Check::from_result("characteristic_function_match", 4.0, 0.0, run())
        .with_detail("max deviation in standard errors, 5 frequencies x 3 maturities")
}

pub fn run(cfg: &RunConfig) -> Report {
    let p = &cfg.params;
    let mut checks = vec![
        martingale(cfg.seed),
        parity(p),
        round_trip(cfg.seed),
        payoff_nonnegative(cfg.seed),
        laplace_bound(),
        laplace_monotone(),
        drift_ratio(p, cfg.seed),
    ];
    checks.extend(sqrt_moment_checks());
    checks.push(density_sign());
    checks.push(Check::from_result("berry_esseen", 1.0, 0.0, berry_esseen_ratio()).with_detail(
        "max over alpha in {0, 1/2}, beta in {1, 1.5}, t in {0.1, 0.01, 0.001} of distance / bound",
    ));
    checks.extend(monte_carlo(p, cfg.mc_paths, cfg.seed));
    checks.push(characteristic_function(p, cfg.mc_paths, cfg.seed));
    let passed = checks.iter().all(|c| c.status == Status::Pass);
    Report { passed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_compares_with_tolerance() {
        assert_eq!(Check::at_most("a", 1.0, 1.0, 0.0).status, Status::Pass);
        assert_eq!(Check::at_most("a", 1.0 + 1e-16, 1.0, 1e-15).status, Status::Pass);
        assert_eq!(Check::at_most("a", 1.1, 1.0, 0.0).status, Status::Fail);
        assert_eq!(Check::from_result("a", 1.0, 0.0, Ok(f64::NAN)).status, Status::Fail);
    }

    #[test]
    fn random_sets_are_admissible_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = random_admissible(&mut a);
            assert!(p.validate().is_ok());
            assert_eq!(p, random_admissible(&mut b));
        }
    }

    #[test]
    fn martingale_defect_is_small_for_reference_set() {
        let p = AtsParams::new(0.0, 1.0, -0.5, 1.0, 1.0, 0.2);
        assert!(martingale_defect(&p, 0.1).unwrap() < 1e-10);
    }
}
