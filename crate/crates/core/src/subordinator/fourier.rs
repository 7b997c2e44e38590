//! Fourier inversion of the subordinator law.
//!
//! The characteristic function of S_t is ψ(v) = L_t(−iv), analytic through the
//! principal branch since Re(1 − iv/λ) = 1. The density follows from
//! (1/π)∫₀^∞ Re[e^{−ivz}ψ(v)] dv and the CDF from Gil-Pelaez,
//! 1/2 − (1/π)∫₀^∞ Im[e^{−ivz}ψ(v)]/v dv.
//!
//! This is slower than the Zolotarev route and loses accuracy once |ψ| decays
//! only polynomially (small α with small θ), so it is used to cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SubordinatorLaw;
use crate::error::{AtsError, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig};

/// Panel budget for the oscillatory integrals.
const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierInversion {
    /// Target accuracy; also the level at which the transform is truncated.
    pub tolerance: f64,
    /// Largest frequency considered before giving up.
    pub max_frequency: f64,
}

impl Default for FourierInversion {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_frequency: 1e8,
        }
    }
}

impl FourierInversion {
    fn psi(law: &SubordinatorLaw, v: f64) -> Complex64 {
        law.log_laplace_complex(Complex64::new(0.0, -v))
            .expect("imaginary axis lies inside the principal branch")
            .exp()
    }

    /// Smallest power-of-two frequency at which `weight(v)·|ψ(v)|` is below
    /// tolerance.
    fn truncation<W: Fn(f64) -> f64>(&self, law: &SubordinatorLaw, weight: W) -> Result<f64> {
        let mut v: f64 = 1.0;
        loop {
            let mag = weight(v) * Self::psi(law, v).norm();
            if mag < self.tolerance * 1e-2 {
                return Ok(v);
            }
            if v > self.max_frequency {
                return Err(AtsError::Inversion {
                    achieved: mag,
                    tolerance: self.tolerance,
                });
            }
            v *= 2.0;
        }
    }

    fn panels(z: f64, upper: f64) -> Vec<f64> {
        let width = (PI / z.abs().max(1e-3)).min(upper / 16.0).max(upper / MAX_PANELS as f64);
        let mut pts = vec![0.0];
        let mut v = width.min(1.0);
        // Geometric start resolves the neighborhood of zero.
        while v < width {
            pts.push(v);
            v *= 2.0;
        }
        let mut v = width;
        while v < upper {
            pts.push(v);
            v += width;
        }
        pts.push(upper);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn run<F: Fn(f64) -> f64>(&self, f: F, pts: &[f64]) -> Result<f64> {
        let cfg = QuadConfig {
            abs_tol: self.tolerance * PI * 0.1,
            rel_tol: 0.0,
            max_intervals: 4 * pts.len() + 4000,
        };
        match integrate_with_breaks(f, pts, cfg) {
            Ok(est) => Ok(est.value / PI),
            Err(AtsError::Quadrature { achieved, .. }) => Err(AtsError::Inversion {
                achieved: achieved / PI,
                tolerance: self.tolerance,
            }),
            Err(e) => Err(e),
        }
    }

    /// Density of S_t at z > 0.
    pub fn density(&self, law: &SubordinatorLaw, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(AtsError::Domain(format!("density requires z > 0, got {z}")));
        }
        let upper = self.truncation(law, |_| 1.0)?;
        let pts = Self::panels(z, upper);
        self.run(|v| (Complex64::new(0.0, -v * z).exp() * Self::psi(law, v)).re, &pts)
    }

    /// P(S_t < z).
    pub fn cdf(&self, law: &SubordinatorLaw, z: f64) -> Result<f64> {
        if z <= 0.0 {
            return Ok(0.0);
        }
        let upper = self.truncation(law, |v| 1.0 / v)?;
        let pts = Self::panels(z, upper);
        let tail = self.run(
            |v| (Complex64::new(0.0, -v * z).exp() * Self::psi(law, v)).im / v,
            &pts,
        )?;
        Ok(0.5 - tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_density_and_cdf() {
        let law = SubordinatorLaw::new(0.0, 1.0, 0.2).unwrap();
        let inv = FourierInversion::default();
        for z in [0.3, 1.0, 2.2] {
            let d = inv.density(&law, z).unwrap();
            assert!((d - law.density(z).unwrap()).abs() < 1e-9, "z {z}");
            let c = inv.cdf(&law, z).unwrap();
            assert!((c - law.cdf(z).unwrap()).abs() < 1e-9, "z {z}");
        }
    }
}
