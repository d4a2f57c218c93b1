//! Physical constants of the self-assembly channel.
//!
//! Every layer (mean-field ODE, stochastic chain, drift-diffusion) reads its
//! rates and geometry from a single [`KineticParams`].
//!
//! Concentrations are in µM, times in seconds, lengths in meters. The
//! stochastic layer works in molecule counts; `volume_factor` converts one
//! into the other (`count = concentration * volume_factor`).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Polymerization rate, µM⁻¹·s⁻¹.
pub const REF_K_PLUS: f64 = 0.979;
/// Depolymerization rate, s⁻¹.
pub const REF_K_MINUS: f64 = 0.166;
/// Spacing between neighbouring monomers, m.
pub const REF_DELTA: f64 = 11e-9;
/// Initial free-monomer level.
pub const REF_N0: f64 = 1000.0;
/// Transmitter surface, m.
pub const REF_X0: f64 = 1e-6;
/// Receiver surface, m.
pub const REF_XL: f64 = 10e-6;
/// Monomers in the anchored nucleation core.
pub const NUCLEUS_SIZE: u32 = 3;

// Absorbs representation error when (x_l - x0) is an exact multiple of delta.
const LATTICE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticParams {
    pub k_plus: f64,
    pub k_minus: f64,
    pub delta: f64,
    /// Initial free-monomer concentration, µM.
    pub n0: f64,
    /// Molecule counts per µM.
    pub volume_factor: f64,
    pub x0: f64,
    pub x_l: f64,
    pub nucleus_size: u32,
    /// Filament length (monomers) at t = 0 in the stochastic layers.
    pub initial_length: u32,
}

impl Default for KineticParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl KineticParams {
    /// The reference parameter block: rates averaged over ATP/ADP actin,
    /// 1 µm transmitter, 10 µm receiver, 11 nm monomer pitch.
    pub fn reference() -> Self {
        Self {
            k_plus: REF_K_PLUS,
            k_minus: REF_K_MINUS,
            delta: REF_DELTA,
            n0: REF_N0,
            volume_factor: 1.0,
            x0: REF_X0,
            x_l: REF_XL,
            nucleus_size: NUCLEUS_SIZE,
            initial_length: NUCLEUS_SIZE + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("k_plus", self.k_plus)?;
        check_finite("k_minus", self.k_minus)?;
        check_finite("delta", self.delta)?;
        check_finite("n0", self.n0)?;
        check_finite("volume_factor", self.volume_factor)?;
        check_finite("x0", self.x0)?;
        check_finite("x_l", self.x_l)?;
        if self.k_plus <= 0.0 {
            return Err(invalid("k_plus", format!("must be > 0, got {}", self.k_plus)));
        }
        if self.k_minus < 0.0 {
            return Err(invalid("k_minus", format!("must be >= 0, got {}", self.k_minus)));
        }
        if self.delta <= 0.0 {
            return Err(invalid("delta", format!("must be > 0, got {}", self.delta)));
        }
        if self.n0 <= 0.0 {
            return Err(invalid("n0", format!("must be > 0, got {}", self.n0)));
        }
        if self.volume_factor <= 0.0 {
            return Err(invalid(
                "volume_factor",
                format!("must be > 0, got {}", self.volume_factor),
            ));
        }
        if self.x_l <= self.x0 {
            return Err(invalid(
                "x_l",
                format!("receiver ({}) must lie beyond transmitter ({})", self.x_l, self.x0),
            ));
        }
        let steps = (self.x_l - self.x0) / self.delta;
        if steps > u32::MAX as f64 / 2.0 {
            return Err(invalid("delta", "channel holds too many monomer sites"));
        }
        let l = self.max_length();
        if l < 4 || l < self.min_length() {
            return Err(invalid(
                "x_l",
                format!("maximum filament length {l} is below the elongation floor"),
            ));
        }
        if self.initial_length < self.min_length() || self.initial_length > l {
            return Err(invalid(
                "initial_length",
                format!(
                    "must lie in [{}, {l}], got {}",
                    self.min_length(),
                    self.initial_length
                ),
            ));
        }
        Ok(())
    }

    /// Shortest filament the model tracks: the nucleus plus one monomer.
    pub fn min_length(&self) -> u32 {
        self.nucleus_size + 1
    }

    /// Length at which the tip touches the receiver.
    pub fn max_length(&self) -> u32 {
        let steps = ((self.x_l - self.x0) / self.delta + LATTICE_EPS).floor();
        self.nucleus_size + steps as u32
    }

    /// Moves the receiver so that [`max_length`](Self::max_length) equals `l`.
    pub fn with_max_length(mut self, l: u32) -> Self {
        let steps = l.saturating_sub(self.nucleus_size) as f64;
        self.x_l = self.x0 + steps * self.delta;
        self
    }

    /// Free-monomer count for the stochastic layers.
    pub fn n_total(&self) -> u64 {
        (self.n0 * self.volume_factor).round().max(0.0) as u64
    }

    /// Tip position of a filament of `length` monomers.
    pub fn position_of(&self, length: u32) -> f64 {
        self.x0 + (length as f64 - self.min_length() as f64) * self.delta
    }

    /// Free monomers left when the filament has `length` monomers, by
    /// conservation from the initial state.
    pub fn free_monomers_at(&self, length: u32) -> u64 {
        let grown = length as i64 - self.initial_length as i64;
        (self.n_total() as i64 - grown).max(0) as u64
    }
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {v}"),
        })
    }
}
