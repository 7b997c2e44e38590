//! ATS parameters, admissibility, regime classification, the martingale drift
//! and the characteristic function of the log-forward.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AtsError, Result};
use crate::subordinator::{derive_seed, SubordinatorLaw};

/// Slack allowed above the upper bound on β before it counts as a violation.
const BETA_UPPER_SLACK: f64 = 1e-12;

/// The six scaling parameters. Serializes as a flat JSON object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtsParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub k_bar: f64,
    pub eta_bar: f64,
    pub sigma_bar: f64,
}

/// One failed admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    AlphaOutOfRange { alpha: f64 },
    NonPositiveScale { name: &'static str, value: f64 },
    BetaOutOfRange { beta: f64, upper: f64 },
    DeltaPositive { delta: f64 },
    DeltaTooNegative { delta: f64, lower: f64 },
    /// β = 0 admits only δ = 0.
    ZeroBetaNegativeDelta { delta: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AlphaOutOfRange { alpha } => write!(f, "alpha = {alpha} is outside [0, 1)"),
            Violation::NonPositiveScale { name, value } => write!(f, "{name} = {value} must be positive"),
            Violation::BetaOutOfRange { beta, upper } => {
                write!(f, "beta = {beta} violates 0 <= beta <= 1/(1 - alpha/2) = {upper}")
            }
            Violation::DeltaPositive { delta } => write!(f, "delta = {delta} violates delta <= 0"),
            Violation::DeltaTooNegative { delta, lower } => {
                write!(f, "delta = {delta} violates delta > -min(beta, (1 - beta(1 - alpha))/alpha) = {lower}")
            }
            Violation::ZeroBetaNegativeDelta { delta } => {
                write!(f, "beta = 0 requires delta = 0, got delta = {delta}")
            }
        }
    }
}

/// Outcome of [`AtsParams::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "admissible");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "inadmissible: {}", parts.join("; "))
    }
}

/// Short-time limit of the ATM implied volatility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaLimit {
    Zero,
    Infinite,
    Finite,
    NotApplicable,
}

/// Short-time limit of the skew term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewLimit {
    Zero,
    MinusSqrtPiOverTwo,
    NegativeFinite,
    NotApplicable,
}

/// Short-time implied-volatility regime of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeCase {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Inadmissible,
}

impl RegimeCase {
    pub fn predicted_sigma0(self) -> SigmaLimit {
        match self {
            RegimeCase::Case1 => SigmaLimit::Zero,
            RegimeCase::Case2 => SigmaLimit::Infinite,
            RegimeCase::Case3 | RegimeCase::Case4 | RegimeCase::Case5 => SigmaLimit::Finite,
            RegimeCase::Inadmissible => SigmaLimit::NotApplicable,
        }
    }

    pub fn predicted_xi0(self) -> SkewLimit {
        match self {
            RegimeCase::Case3 => SkewLimit::Zero,
            RegimeCase::Case4 => SkewLimit::MinusSqrtPiOverTwo,
            RegimeCase::Case5 => SkewLimit::NegativeFinite,
            _ => SkewLimit::NotApplicable,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            RegimeCase::Case1 => "Case1",
            RegimeCase::Case2 => "Case2",
            RegimeCase::Case3 => "Case3",
            RegimeCase::Case4 => "Case4",
            RegimeCase::Case5 => "Case5",
            RegimeCase::Inadmissible => "Inadmissible",
        }
    }
}

impl fmt::Display for RegimeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            RegimeCase::Case1 => "σ̂₀ = 0",
            RegimeCase::Case2 => "σ̂₀ = ∞",
            RegimeCase::Case3 => "σ̂₀ finite, ξ̂₀ = 0",
            RegimeCase::Case4 => "σ̂₀ finite, ξ̂₀ = −√(π/2)",
            RegimeCase::Case5 => "σ̂₀ finite, ξ̂₀ negative finite",
            RegimeCase::Inadmissible => "parameters outside the admissible region",
        };
        write!(f, "{}: {}", self.tag(), text)
    }
}

impl AtsParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, k_bar: f64, eta_bar: f64, sigma_bar: f64) -> Self {
        Self {
            alpha,
            beta,
            delta,
            k_bar,
            eta_bar,
            sigma_bar,
        }
    }

    /// k_t = k̄·t^β.
    pub fn k_t(&self, t: f64) -> f64 {
        self.k_bar * t.powf(self.beta)
    }

    /// η_t = η̄·t^δ.
    pub fn eta_t(&self, t: f64) -> f64 {
        self.eta_bar * t.powf(self.delta)
    }

    /// Law of the subordinator S_t at maturity `t`.
    pub fn law(&self, t: f64) -> Result<SubordinatorLaw> {
        SubordinatorLaw::new(self.alpha, t, self.k_t(t))
    }

    /// Upper bound 1/(1 − α/2) on β.
    pub fn beta_upper(&self) -> f64 {
        1.0 / (1.0 - self.alpha / 2.0)
    }

    /// Strict lower bound −min(β, (1 − β(1−α))/α) on δ (−β when α = 0).
    pub fn delta_lower(&self) -> f64 {
        if self.alpha == 0.0 {
            -self.beta
        } else {
            -self.beta.min((1.0 - self.beta * (1.0 - self.alpha)) / self.alpha)
        }
    }

    /// Checks the admissible region, naming every violated condition.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if !(0.0..1.0).contains(&self.alpha) {
            violations.push(Violation::AlphaOutOfRange { alpha: self.alpha });
        }
        for (name, value) in [("k_bar", self.k_bar), ("eta_bar", self.eta_bar), ("sigma_bar", self.sigma_bar)] {
            if !(value > 0.0) || !value.is_finite() {
                violations.push(Violation::NonPositiveScale { name, value });
            }
        }
        let both_zero = self.beta == 0.0 && self.delta == 0.0;
        if !both_zero && violations.is_empty() {
            let upper = self.beta_upper();
            if !(self.beta >= 0.0) || self.beta > upper + BETA_UPPER_SLACK {
                violations.push(Violation::BetaOutOfRange {
                    beta: self.beta,
                    upper,
                });
            }
            if !(self.delta <= 0.0) {
                violations.push(Violation::DeltaPositive { delta: self.delta });
            }
            if self.beta == 0.0 && self.delta < 0.0 {
                violations.push(Violation::ZeroBetaNegativeDelta { delta: self.delta });
            } else {
                let lower = self.delta_lower();
                if !(self.delta > lower) {
                    violations.push(Violation::DeltaTooNegative {
                        delta: self.delta,
                        lower,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Regime of the parameters, with exact comparisons on the boundaries.
    pub fn classify(&self) -> RegimeCase {
        if !self.validate().is_ok() {
            return RegimeCase::Inadmissible;
        }
        let (b, d) = (self.beta, self.delta);
        if b == 1.0 && d == -0.5 {
            RegimeCase::Case5
        } else if b < 1.0 && d == -0.5 {
            RegimeCase::Case4
        } else if b >= 1.0 && d >= -b / 2.0 {
            RegimeCase::Case3
        } else if (b < 1.0 && d > -(0.5f64.min(b))) || (b == 0.0 && d == 0.0) {
            RegimeCase::Case1
        } else if d < -0.5 * b.max(1.0) {
            RegimeCase::Case2
        } else {
            unreachable!("admissible region is covered by the five regimes (beta {b}, delta {d})")
        }
    }

    /// φ_t·t = −ln L_t(t·σ̄²·η_t).
    pub fn drift_times_t(&self, t: f64) -> Result<f64> {
        let u = t * self.sigma_bar.powi(2) * self.eta_t(t);
        Ok(-self.law(t)?.log_laplace(u)?)
    }

    /// Per-unit-time drift φ_t.
    pub fn phi(&self, t: f64) -> Result<f64> {
        Ok(self.drift_times_t(t)? / t)
    }

    /// φ_t/(σ̄²η_t); the value of z at which l_t^z vanishes.
    pub fn drift_ratio(&self, t: f64) -> Result<f64> {
        Ok(self.phi(t)? / (self.sigma_bar.powi(2) * self.eta_t(t)))
    }

    /// E[e^{iuf_t}] for real `u`.
    pub fn characteristic_fn(&self, u: f64, t: f64) -> Result<Complex64> {
        self.characteristic_fn_complex(Complex64::new(u, 0.0), t)
    }

    /// E[e^{iuf_t}] continued to complex `u` where the transform exists;
    /// u = −i gives E[e^{f_t}].
    pub fn characteristic_fn_complex(&self, u: Complex64, t: f64) -> Result<Complex64> {
        let s2 = self.sigma_bar.powi(2);
        let i = Complex64::i();
        let w = i * u * t * (0.5 + self.eta_t(t)) * s2 + t * u * u * s2 / 2.0;
        let law = self.law(t)?;
        let log_l = law.log_laplace_complex(w)?;
        Ok((log_l + i * u * self.drift_times_t(t)?).exp())
    }

    /// Draws f_t = −(η_t + 1/2)σ̄²S_t·t + σ̄√(S_t·t)·g + φ_t·t.
    ///
    /// S_t and g come from independent streams derived from `seed`.
    pub fn sample_log_forward(&self, t: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(AtsError::Domain("sample count must be at least 1".into()));
        }
        let law = self.law(t)?;
        let s = law.sample(count, derive_seed(seed, 0))?;
        let drift = self.drift_times_t(t)?;
        let s2 = self.sigma_bar.powi(2);
        let eta = self.eta_t(t);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        Ok(s
            .values
            .iter()
            .map(|&z| {
                let g: f64 = StandardNormal.sample(&mut rng);
                -(eta + 0.5) * s2 * z * t + self.sigma_bar * (z * t).sqrt() * g + drift
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, beta: f64, delta: f64) -> AtsParams {
        AtsParams::new(alpha, beta, delta, 1.0, 1.0, 0.2)
    }

    #[test]
    fn admissibility_examples() {
        assert!(p(0.5, 1.0, -0.5).validate().is_ok());
        let r = p(0.5, 1.2, -0.8).validate();
        assert!(matches!(r.violations[..], [Violation::DeltaTooNegative { .. }]));
        assert!(p(0.3, 0.0, 0.0).validate().is_ok());
        let r = p(0.9, 2.0, -0.5).validate();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::BetaOutOfRange { .. })));
        let r = p(0.0, 0.0, -0.1).validate();
        assert!(matches!(r.violations[..], [Violation::ZeroBetaNegativeDelta { .. }]));
    }

    #[test]
    fn beta_upper_bound_is_inclusive() {
        let upper = 1.0 / (1.0 - 0.25);
        assert!(p(0.5, upper, -0.1).validate().is_ok());
        assert!(!p(0.5, upper + 1e-9, -0.1).validate().is_ok());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(p(0.0, 1.0, -0.5).classify(), RegimeCase::Case5);
        assert_eq!(p(0.3, 0.7, -0.5).classify(), RegimeCase::Case4);
        // δ = −β is excluded by the strict lower bound, even on the Case 4 line.
        assert_eq!(p(0.3, 0.5, -0.5).classify(), RegimeCase::Inadmissible);
        assert_eq!(p(0.5, 1.2, -0.7).classify(), RegimeCase::Case2);
        assert_eq!(p(0.0, 0.0, 0.0).classify(), RegimeCase::Case1);
        assert_eq!(p(0.0, 1.0, -0.25).classify(), RegimeCase::Case3);
        // Case 3 owns its lower edge δ = −β/2 for β > 1.
        assert_eq!(p(0.2, 1.1, -0.55).classify(), RegimeCase::Case3);
        // Case 1 does not own δ = −β for β < 1/2 (inadmissible there anyway).
        assert_eq!(p(0.0, 0.3, -0.3).classify(), RegimeCase::Inadmissible);
        assert_eq!(p(0.9, 2.0, -0.5).classify(), RegimeCase::Inadmissible);
    }

    #[test]
    fn display_strings() {
        assert_eq!(RegimeCase::Case5.to_string(), "Case5: σ̂₀ finite, ξ̂₀ negative finite");
        assert_eq!(RegimeCase::Case1.to_string(), "Case1: σ̂₀ = 0");
    }

    #[test]
    fn characteristic_function_at_origin_and_martingale_point() {
        let params = p(0.3, 1.0, -0.5);
        let c0 = params.characteristic_fn(0.0, 0.1).unwrap();
        assert!((c0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let m = params.characteristic_fn_complex(Complex64::new(0.0, -1.0), 0.1).unwrap();
        assert!((m - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let params = p(0.25, 1.0, -0.5);
        let text = serde_json::to_string(&params).unwrap();
        assert_eq!(
            text,
            r#"{"alpha":0.25,"beta":1.0,"delta":-0.5,"k_bar":1.0,"eta_bar":1.0,"sigma_bar":0.2}"#
        );
        let back: AtsParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, params);
    }
}
