//! Drift-diffusion approximation of the master equation.
//!
//! Expanding the one-step jumps of the length chain to second order gives
//!
//! ```text
//! dp/dt = -E dp/dx + D d²p/dx²,   E = (r+ - k-) δ,   D = (r+ + k-) δ² / 2
//! ```
//!
//! where `r+` is the polymerization jump rate. The reference coefficients use
//! `r+ = k+ N0`; [`CoefficientRule::PairCount`] uses the pair-counting
//! propensity `k+ N0 (N0 - 1) / 2` of the stochastic chain instead.
//!
//! The free-space solution from a point source at `x0` is a Gaussian with
//! mean `x0 + E t` and variance `2 D t`.

mod dtm;
mod pde;

pub use dtm::{dtm_drift_diffusion, dtm_inverse, dtm_transform, gaussian_seed, DtmTable, Polynomial2};
pub use pde::{
    solve_fp_pde, solve_fp_pde_with, CoefficientMode, FpSolution, FpSolverOptions, InitialCondition,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::exact_concentration;
use crate::params::KineticParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpCoefficients {
    /// Elongation rate, m/s.
    pub drift: f64,
    /// Spread coefficient, m²/s.
    pub diffusion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRule {
    /// Jump rate `k+ N`, with `N` the free-monomer concentration.
    #[default]
    Printed,
    /// Jump rate `k+ N (N - 1) / 2`, with `N` the free-monomer count.
    PairCount,
}

impl FpCoefficients {
    /// Coefficients for a given polymerization jump rate (s⁻¹).
    pub fn from_jump_rate(rate_up: f64, params: &KineticParams) -> Result<Self> {
        let d = params.delta;
        let diffusion = (rate_up + params.k_minus) / 2.0 * d * d;
        if !(diffusion > 0.0) || !diffusion.is_finite() {
            return Err(Error::InvalidInput(format!(
                "diffusion coefficient must be positive, got {diffusion}"
            )));
        }
        Ok(Self {
            drift: (rate_up - params.k_minus) * d,
            diffusion,
        })
    }

    /// Coefficients with the free-monomer level frozen at `n`
    /// (µM for [`CoefficientRule::Printed`], count for `PairCount`).
    pub fn at_level(n: f64, rule: CoefficientRule, params: &KineticParams) -> Result<Self> {
        let rate = match rule {
            CoefficientRule::Printed => params.k_plus * n,
            CoefficientRule::PairCount => {
                if n < 2.0 {
                    0.0
                } else {
                    params.k_plus * n * (n - 1.0) / 2.0
                }
            }
        };
        Self::from_jump_rate(rate, params)
    }

    /// Initial-level coefficients under `rule`.
    pub fn initial(rule: CoefficientRule, params: &KineticParams) -> Result<Self> {
        params.validate()?;
        match rule {
            CoefficientRule::Printed => Self::at_level(params.n0, rule, params),
            CoefficientRule::PairCount => Self::at_level(params.n_total() as f64, rule, params),
        }
    }

    /// Coefficients with the free-monomer level taken from the mean-field
    /// kinetics at time `t`.
    pub fn at_time(t: f64, rule: CoefficientRule, params: &KineticParams) -> Result<Self> {
        let n = exact_concentration(t, params)?;
        match rule {
            CoefficientRule::Printed => Self::at_level(n, rule, params),
            CoefficientRule::PairCount => Self::at_level(n * params.volume_factor, rule, params),
        }
    }

    /// Free-space density at `x`, time `t > 0`, for a point source at `x0`.
    pub fn density(&self, x: f64, t: f64, x0: f64) -> f64 {
        let var2 = 4.0 * self.diffusion * t;
        let z = x - x0 - self.drift * t;
        (-z * z / var2).exp() / (std::f64::consts::PI * var2).sqrt()
    }

    /// Probability of `[a, b]` under the free-space density.
    pub fn interval_mass(&self, a: f64, b: f64, t: f64, x0: f64) -> f64 {
        let mean = x0 + self.drift * t;
        let s = (4.0 * self.diffusion * t).sqrt();
        0.5 * (libm::erf((b - mean) / s) - libm::erf((a - mean) / s))
    }

    /// Grid Peclet number `E dx / D`.
    pub fn peclet(&self, dx: f64) -> f64 {
        self.drift * dx / self.diffusion
    }
}

/// Reference coefficients, `E = (k+ N0 - k-) δ`, `D = (k+ N0 + k-) δ² / 2`.
pub fn fp_coefficients(params: &KineticParams) -> Result<FpCoefficients> {
    FpCoefficients::initial(CoefficientRule::Printed, params)
}

/// Drifting Gaussian with mean `x0 + E t` and variance `2 D t`.
pub fn analytic_density(x: f64, t: f64, params: &KineticParams) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("density needs t > 0, got {t}")));
    }
    Ok(fp_coefficients(params)?.density(x, t, params.x0))
}

/// Density `p(x)` on a 1D grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityField {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl DensityField {
    /// Trapezoidal integral of `x^k p(x)`.
    fn moment(&self, k: i32) -> f64 {
        self.x
            .windows(2)
            .zip(self.p.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (x[0].powi(k) * p[0] + x[1].powi(k) * p[1]))
            .sum()
    }

    pub fn mass(&self) -> f64 {
        self.moment(0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let centered: f64 = self
            .x
            .windows(2)
            .zip(self.p.windows(2))
            .map(|(x, p)| {
                let a = (x[0] - m) * (x[0] - m) * p[0];
                let b = (x[1] - m) * (x[1] - m) * p[1];
                0.5 * (x[1] - x[0]) * (a + b)
            })
            .sum();
        centered / self.mass()
    }

    /// Grid position of the largest value.
    pub fn peak(&self) -> f64 {
        let (i, _) = self
            .p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        self.x[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_coefficients() {
        let p = KineticParams::reference();
        let c = fp_coefficients(&p).unwrap();
        assert_relative_eq!(c.drift, (0.979 * 1000.0 - 0.166) * 11e-9, max_relative = 1e-15);
        assert_relative_eq!(c.drift, 1.0767174e-5, max_relative = 1e-12);
        assert_relative_eq!(c.diffusion, 5.9239543e-14, max_relative = 1e-12);
    }

    #[test]
    fn balanced_rates_have_no_drift() {
        let mut p = KineticParams::reference();
        p.k_minus = p.k_plus * p.n0;
        let c = fp_coefficients(&p).unwrap();
        assert!(c.drift.abs() < 1e-25);
        assert!(c.diffusion > 0.0);
    }

    #[test]
    fn pair_rule_uses_counts() {
        let mut p = KineticParams::reference();
        p.n0 = 200.0;
        let c = FpCoefficients::initial(CoefficientRule::PairCount, &p).unwrap();
        assert_relative_eq!(c.drift, (0.979 * 200.0 * 199.0 / 2.0 - 0.166) * 11e-9, max_relative = 1e-14);
    }

    #[test]
    fn density_requires_positive_time() {
        let p = KineticParams::reference();
        assert!(analytic_density(p.x0, 0.0, &p).is_err());
        assert!(analytic_density(p.x0, -1.0, &p).is_err());
    }

    #[test]
    fn density_peaks_at_drifted_mean() {
        let p = KineticParams::reference();
        let c = fp_coefficients(&p).unwrap();
        let t = 0.2;
        let mode = p.x0 + c.drift * t;
        let at_mode = analytic_density(mode, t, &p).unwrap();
        let h = 1e-9;
        assert!(at_mode > analytic_density(mode + h, t, &p).unwrap());
        assert!(at_mode > analytic_density(mode - h, t, &p).unwrap());
        assert_relative_eq!(at_mode, 1.0 / (4.0 * std::f64::consts::PI * c.diffusion * t).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn interval_mass_matches_quadrature() {
        let p = KineticParams::reference();
        let c = fp_coefficients(&p).unwrap();
        let t = 0.1;
        let (a, b) = (p.x0 + c.drift * t - 2e-7, p.x0 + c.drift * t + 5e-8);
        let n = 20_000;
        let h = (b - a) / n as f64;
        // composite Simpson
        let mut s = c.density(a, t, p.x0) + c.density(b, t, p.x0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * c.density(a + i as f64 * h, t, p.x0);
        }
        s *= h / 3.0;
        assert_relative_eq!(c.interval_mass(a, b, t, p.x0), s, max_relative = 1e-12);
    }
}
