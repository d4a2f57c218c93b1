//! Distances between the stochastic, master-equation and drift-diffusion
//! layers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fokker_planck::{CoefficientRule, FpCoefficients};
use crate::master::{build_generator, MasterSolver, ProbabilityVector};
use crate::params::KineticParams;
use crate::ssa::EnsembleStats;

/// `½ Σ |p - q|` over vectors of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "distributions differ in length: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Distance between the SSA histogram at sample `s` and a master-equation
/// solution over the same length lattice.
pub fn ssa_master_distance(stats: &EnsembleStats, s: usize, pv: &ProbabilityVector) -> Result<f64> {
    if s >= stats.sample_times.len() {
        return Err(Error::InvalidInput(format!("sample index {s} out of range")));
    }
    if stats.min_length != pv.min_length {
        return Err(Error::InvalidInput("length lattices start at different lengths".into()));
    }
    total_variation(&stats.distribution(s), &pv.p)
}

/// Drift-diffusion mass of the cell `[x - δ/2, x + δ/2]` around each lattice
/// position, renormalized to one over the lattice.
pub fn lattice_masses(
    coeffs: &FpCoefficients,
    t: f64,
    source: f64,
    lengths: impl Iterator<Item = u32>,
    params: &KineticParams,
) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("lattice masses need t > 0, got {t}")));
    }
    let half = params.delta / 2.0;
    let mut q: Vec<f64> = lengths
        .map(|l| {
            let x = params.position_of(l);
            coeffs.interval_mass(x - half, x + half, t, source)
        })
        .collect();
    let total: f64 = q.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput(format!("no drift-diffusion mass on the lattice at t = {t}")));
    }
    q.iter_mut().for_each(|v| *v /= total);
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeComparison {
    pub t: f64,
    pub total_variation: f64,
    /// Most probable length under the master equation.
    pub master_mode: u32,
    /// Most probable length under the drift-diffusion density.
    pub fp_mode: u32,
    pub master: Vec<f64>,
    pub fp: Vec<f64>,
}

impl LatticeComparison {
    pub fn mode_offset(&self) -> u32 {
        self.master_mode.abs_diff(self.fp_mode)
    }
}

/// Time by which the mean filament has consumed `fraction` of the free
/// monomers at the initial growth rate. Frozen drift-diffusion coefficients
/// only describe the chain before that.
pub fn weak_depletion_horizon(params: &KineticParams, rule: CoefficientRule, fraction: f64) -> Result<f64> {
    let c = FpCoefficients::initial(rule, params)?;
    let speed = c.drift / params.delta;
    if !(speed > 0.0) {
        return Err(Error::InvalidInput("filament does not grow on average".into()));
    }
    Ok(fraction * params.n_total() as f64 / speed)
}

/// Master-equation distribution against the drift-diffusion density on the
/// length lattice, at each of `times`.
pub fn master_vs_fp(params: &KineticParams, rule: CoefficientRule, times: &[f64]) -> Result<Vec<LatticeComparison>> {
    let gen = build_generator(params)?;
    let p0 = ProbabilityVector::point_mass(params)?;
    let solutions = MasterSolver::default().solve(&p0, &gen, times)?;
    let coeffs = FpCoefficients::initial(rule, params)?;
    let source = params.position_of(params.initial_length);
    solutions
        .into_iter()
        .map(|pv| {
            let fp = lattice_masses(&coeffs, pv.t, source, pv.lengths(), params)?;
            let tv = total_variation(&pv.p, &fp)?;
            Ok(LatticeComparison {
                t: pv.t,
                total_variation: tv,
                master_mode: pv.min_length + argmax(&pv.p) as u32,
                fp_mode: pv.min_length + argmax(&fp) as u32,
                master: pv.p,
                fp,
            })
        })
        .collect()
}
