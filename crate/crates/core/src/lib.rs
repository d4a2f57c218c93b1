//! Models of actin-nanowire self-assembly between a transmitter and a
//! receiver surface.
//!
//! The same reaction is described at four levels: mean-field kinetics
//! ([`kinetics`]), exact stochastic trajectories ([`ssa`]), the chemical
//! master equation ([`master`]) and its drift-diffusion approximation
//! ([`fokker_planck`]). [`stability`] holds the phase-plane and eigenvalue
//! analysis, and [`compare`] the distances used to cross-check the layers.

pub mod compare;
pub mod error;
pub mod fokker_planck;
pub mod kinetics;
pub mod master;
pub mod params;
pub mod scenario;
pub mod ssa;
pub mod stability;
mod tridiag;

pub use error::{Error, Result};
pub use params::KineticParams;
