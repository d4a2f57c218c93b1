//! The three rate regimes: growth, balance and collapse.
//!
//! Balance is set per layer. The drift-diffusion layer balances
//! `k+ N0 = k-`; the stochastic layer balances the pair propensity
//! `k+ N (N - 1) / 2 = k-` at the initial count.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::KineticParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateScenario {
    Growth,
    Balanced,
    Collapse,
}

impl RateScenario {
    pub const ALL: [RateScenario; 3] = [Self::Growth, Self::Balanced, Self::Collapse];

    /// Polymerization jump rate over depolymerization rate.
    pub fn ratio(self) -> f64 {
        match self {
            Self::Growth => 2.0,
            Self::Balanced => 1.0,
            Self::Collapse => 0.5,
        }
    }

    /// Expected sign of the mean drift.
    pub fn drift_sign(self) -> i8 {
        match self {
            Self::Growth => 1,
            Self::Balanced => 0,
            Self::Collapse => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Growth => "growth",
            Self::Balanced => "balanced",
            Self::Collapse => "collapse",
        }
    }

    /// `base` with `k_minus` set so that `k+ N0 / k- = ratio`.
    pub fn fp_params(self, base: &KineticParams) -> Result<KineticParams> {
        base.validate()?;
        let mut p = *base;
        p.k_minus = p.k_plus * p.n0 / self.ratio();
        p.validate()?;
        Ok(p)
    }

    /// `base` with `k_minus` set so that the initial pair propensity over
    /// `k-` equals `ratio`.
    pub fn ssa_params(self, base: &KineticParams) -> Result<KineticParams> {
        base.validate()?;
        let mut p = *base;
        let n = p.n_total() as f64;
        p.k_minus = p.k_plus * n * (n - 1.0) / 2.0 / self.ratio();
        p.validate()?;
        Ok(p)
    }
}
