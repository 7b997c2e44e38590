mod common;

use atslab_core::pricer::{
    black_price, black_vega, conditional_payoff, l_term, price_mc, price_quadrature, OptionSpec,
};
use atslab_core::AtsParams;
use common::*;
use proptest::prelude::*;

fn case5(alpha: f64) -> AtsParams {
    AtsParams::new(alpha, 1.0, -0.5, 1.0, 1.0, 0.2)
}

#[test]
fn put_call_parity() {
    for p in [case5(0.0), case5(0.5), case5(0.3), AtsParams::new(0.2, 1.2, -0.3, 0.5, 2.0, 0.3)] {
        for t in [1e-4, 1e-2, 0.3, 1.0] {
            for y in [-2.0, -0.5, 0.0, 0.7, 1.5] {
                let c = price_quadrature(&OptionSpec::call(t, y), &p).unwrap().price;
                let q = price_quadrature(&OptionSpec::put(t, y), &p).unwrap().price;
                let x = y * t.sqrt();
                assert!((c - q - (1.0 - x.exp())).abs() < 1e-9, "t {t} y {y}: {}", c - q + x.exp_m1());
            }
        }
    }
}

#[test]
fn prices_inside_arbitrage_bounds_and_monotone_in_strike() {
    let p = case5(0.5);
    for t in [1e-3, 0.1, 1.0] {
        let mut prev_call = f64::INFINITY;
        let mut prev_put = 0.0;
        for y in linspace(-2.0, 2.0, 21) {
            let cs = OptionSpec::call(t, y);
            let ps = OptionSpec::put(t, y);
            let c = price_quadrature(&cs, &p).unwrap().price;
            let q = price_quadrature(&ps, &p).unwrap().price;
            let (lo, hi) = cs.price_bounds();
            assert!(c > lo - 1e-15 && c < hi, "call t {t} y {y}");
            let (lo, hi) = ps.price_bounds();
            assert!(q > lo - 1e-15 && q < hi, "put t {t} y {y}");
            assert!(c <= prev_call + 1e-15);
            assert!(q >= prev_put - 1e-15);
            prev_call = c;
            prev_put = q;
        }
    }
}

#[test]
fn black_limit_without_jumps() {
    // η̄ → 0 leaves a Black price with variance σ̄²tS_t. With Var[S_t] = k̄ small
    // the mixture is B(σ̄) + ½·∂²B(σ̄√z)/∂z²·k̄ up to O(k̄²).
    let k_bar = 1e-6;
    let p = AtsParams::new(0.0, 1.0, 0.0, k_bar, 1e-10, 0.25);
    for t in [0.01, 0.5] {
        for y in [-1.0, 0.0, 0.8] {
            let spec = OptionSpec::call(t, y);
            let got = price_quadrature(&spec, &p).unwrap().price;
            let b = |z: f64| black_price(0.25 * z.sqrt(), &spec);
            let h = 1e-3;
            let curvature = (b(1.0 + h) - 2.0 * b(1.0) + b(1.0 - h)) / (h * h);
            let want = b(1.0) + 0.5 * curvature * k_bar;
            let correction = (want - b(1.0)).abs();
            assert!((got - want).abs() < 1e-13 + 1e-2 * correction, "t {t} y {y}: {got} vs {want}");
        }
    }
}

#[test]
fn black_price_against_direct_formula() {
    for (vol, t, y) in [(0.2, 0.5, 0.3), (0.6, 2.0, -1.1), (0.05, 1e-3, 0.0)] {
        let x: f64 = y * f64::sqrt(t);
        let sd = vol * f64::sqrt(t);
        let d1 = (-x + sd * sd / 2.0) / sd;
        let d2 = d1 - sd;
        let call = norm_cdf(d1) - x.exp() * norm_cdf(d2);
        let got = black_price(vol, &OptionSpec::call(t, y));
        assert!((got - call).abs() < 1e-13);
        let bump = 1e-6;
        let fd = (black_price(vol + bump, &OptionSpec::call(t, y)) - black_price(vol - bump, &OptionSpec::call(t, y)))
            / (2.0 * bump);
        assert!((black_vega(vol, &OptionSpec::put(t, y)) - fd).abs() < 1e-7);
    }
}

#[test]
fn black_atm_expansion_bound() {
    for vol in linspace(0.05, 0.5, 10) {
        for t in geomspace(1e-4, 1.0, 13) {
            let exact = black_price(vol, &OptionSpec::call(t, 0.0));
            let approx = vol * (t / (2.0 * std::f64::consts::PI)).sqrt();
            assert!((exact - approx).abs() <= vol.powi(3) * t.powf(1.5) / 20.0);
        }
    }
}

#[test]
fn atm_price_vanishes_with_maturity() {
    let p = case5(0.0);
    let mut prev = 0.0;
    for t in geomspace(1e-8, 1e-1, 8) {
        let c = price_quadrature(&OptionSpec::call(t, 0.0), &p).unwrap().price;
        assert!(c > prev);
        prev = c;
    }
    let c = price_quadrature(&OptionSpec::call(1e-10, 0.0), &p).unwrap().price;
    assert!(c < 1e-4);
}

#[test]
fn l_term_formula_and_root() {
    let p = case5(0.5);
    let t = 0.02;
    let rho = p.drift_ratio(t).unwrap();
    assert!(l_term(rho, t, &p).unwrap().abs() < 1e-12);
    let phi = p.phi(t).unwrap();
    let z: f64 = 1.7;
    let direct = -0.2 * p.eta_t(t) * (z * t).sqrt() + phi * t.sqrt() / (0.2 * z.sqrt());
    assert!((l_term(z, t, &p).unwrap() - direct).abs() < 1e-14);
    assert!(l_term(0.0, t, &p).is_err());
}

#[test]
fn density_weight_increasing_near_one() {
    // m(z) = N'(−l_t^z + σ̄√(zt)/2)·σ̄√z rises on [1, 1.05] at short maturities.
    for alpha in [0.0, 0.5] {
        let p = case5(alpha);
        for t in [1e-3, 1e-4] {
            let m = |z: f64| {
                let arg = -l_term(z, t, &p).unwrap() + 0.2 * (z * t).sqrt() / 2.0;
                (-arg * arg / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * 0.2 * z.sqrt()
            };
            let zs = linspace(1.0, 1.05, 51);
            for w in zs.windows(2) {
                assert!(m(w[1]) > m(w[0]), "α {alpha} t {t} z {}", w[0]);
            }
        }
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let p = case5(0.0);
    let spec = OptionSpec::call(0.1, 0.0);
    let q = price_quadrature(&spec, &p).unwrap().price;
    let mc = price_mc(&spec, &p, 1_000_000, 42).unwrap();
    assert!(mc.std_error < 5e-4);
    assert!((mc.price - q).abs() < 3.0 * mc.std_error, "{} vs {q} ± {}", mc.price, mc.std_error);
}

#[test]
fn monte_carlo_deep_in_the_money() {
    let p = case5(0.5);
    let t: f64 = 0.1;
    let spec = OptionSpec::call(t, -10.0 / t.sqrt());
    let mc = price_mc(&spec, &p, 400_000, 7).unwrap();
    let want = 1.0 - (-10f64).exp();
    assert!((mc.price - want).abs() < 3.0 * mc.std_error + 1e-15, "{} ± {}", mc.price, mc.std_error);
    let q = price_quadrature(&spec, &p).unwrap().price;
    assert!((q - want).abs() < 1e-12);
}

#[test]
fn monte_carlo_is_deterministic() {
    let p = case5(0.3);
    let spec = OptionSpec::call(0.1, 0.2);
    assert_eq!(price_mc(&spec, &p, 150_000, 9).unwrap(), price_mc(&spec, &p, 150_000, 9).unwrap());
    assert!(price_mc(&spec, &p, 0, 9).is_err());
}

#[test]
fn conditional_payoff_matches_black_given_variance() {
    // Given S_t = z, f_t is Gaussian with mean φ_t t − t σ̄² (η_t + 1/2) z and variance σ̄² t z.
    let p = case5(0.0);
    let t = 0.3;
    let phi_t = p.drift_times_t(t).unwrap();
    for z in [0.2, 1.0, 3.5] {
        for y in [-0.4, 0.3] {
            let spec = OptionSpec::call(t, y);
            let mean = phi_t - t * 0.04 * (p.eta_t(t) + 0.5) * z;
            let sd: f64 = 0.2 * (t * z).sqrt();
            let x = y * t.sqrt();
            // E[(e^f − e^x)^+] with f ~ N(mean, sd²).
            let d1 = (mean + sd * sd - x) / sd;
            let d2 = d1 - sd;
            let want = (mean + sd * sd / 2.0).exp() * norm_cdf(d1) - x.exp() * norm_cdf(d2);
            let got = conditional_payoff(z, &spec, &p).unwrap();
            assert!((got - want).abs() < 1e-13, "z {z} y {y}: {got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn conditional_payoff_nonnegative(
        alpha in 0.0f64..0.9,
        beta in 0.5f64..1.5,
        frac in 0.0f64..1.0,
        k_bar in 0.05f64..3.0,
        eta_bar in 0.05f64..3.0,
        sigma_bar in 0.05f64..0.6,
    ) {
        let lo = AtsParams::new(alpha, beta, 0.0, k_bar, eta_bar, sigma_bar).delta_lower();
        let delta = lo * frac * 0.999;
        let p = AtsParams::new(alpha, beta, delta, k_bar, eta_bar, sigma_bar);
        prop_assume!(p.validate().is_ok());
        for t in [1e-4, 0.1, 1.0] {
            for y in [-3.0, -0.5, 0.0, 0.5, 3.0] {
                for z in geomspace(1e-6, 1e3, 19) {
                    let c = conditional_payoff(z, &OptionSpec::call(t, y), &p).unwrap();
                    let q = conditional_payoff(z, &OptionSpec::put(t, y), &p).unwrap();
                    prop_assert!(c >= 0.0 && q >= 0.0);
                }
            }
        }
    }
}
