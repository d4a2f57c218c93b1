//! Chemical master equation over filament length.
//!
//! Conservation ties the free-monomer count to the length, so the joint
//! state collapses to a birth-death chain on `[min_length, max_length]`:
//!
//! ```text
//! dP_i/dt = -(k+ M_i + k-) P_i + k+ M_{i-1} P_{i-1} + k- P_{i+1},   M_i = N_i (N_i - 1) / 2
//! ```
//!
//! with no depolymerization out of the floor and no transitions out of the
//! receiver state. The generator is tridiagonal and stiff (exit rates reach
//! ~5e5 s⁻¹ at the reference parameters); the default integrator is TR-BDF2
//! with step-doubling error control, and uniformization is available as an
//! independent check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::KineticParams;
use crate::ssa::propensity_polymerization;
use crate::tridiag::Tridiagonal;

pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Birth-death generator in column convention (`dp/dt = W p`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub min_length: u32,
    /// `up[k]`: rate from state `min_length + k` to the next longer state.
    pub up: Vec<f64>,
    /// `down[k]`: rate from state `min_length + k` to the next shorter state.
    pub down: Vec<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.up.len()
    }

    pub fn max_length(&self) -> u32 {
        self.min_length + self.dim() as u32 - 1
    }

    /// Entry `W[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            -(self.up[col] + self.down[col])
        } else if row == col + 1 {
            self.up[col]
        } else if row + 1 == col {
            self.down[col]
        } else {
            0.0
        }
    }

    pub fn column_sum(&self, col: usize) -> f64 {
        let n = self.dim();
        let lo = col.saturating_sub(1);
        let hi = (col + 1).min(n - 1);
        (lo..=hi).map(|r| self.entry(r, col)).sum()
    }

    pub fn to_tridiagonal(&self) -> Tridiagonal {
        let n = self.dim();
        let mut m = Tridiagonal::zeros(n);
        for k in 0..n {
            m.diag[k] = -(self.up[k] + self.down[k]);
        }
        for k in 0..n.saturating_sub(1) {
            m.lower[k] = self.up[k];
            m.upper[k] = self.down[k + 1];
        }
        m
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u + d)
            .fold(0.0, f64::max)
    }
}

pub fn build_generator(params: &KineticParams) -> Result<TransitionMatrix> {
    build_generator_capped(params, DEFAULT_STATE_CAP)
}

pub fn build_generator_capped(params: &KineticParams, cap: usize) -> Result<TransitionMatrix> {
    params.validate()?;
    let min = params.min_length();
    let max = params.max_length();
    if max < min + 1 {
        return Err(Error::InvalidInput(format!(
            "master equation needs at least two states, got max length {max}"
        )));
    }
    let states = (max - min + 1) as usize;
    if states > cap {
        return Err(Error::StateSpaceTooLarge { states, cap });
    }
    let mut up = Vec::with_capacity(states);
    let mut down = Vec::with_capacity(states);
    for length in min..=max {
        if length == max {
            up.push(0.0);
            down.push(0.0);
            continue;
        }
        up.push(propensity_polymerization(params.free_monomers_at(length), params));
        down.push(if length > min { params.k_minus } else { 0.0 });
    }
    Ok(TransitionMatrix {
        min_length: min,
        up,
        down,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityVector {
    pub min_length: u32,
    /// `p[k]` is the probability of length `min_length + k`.
    pub p: Vec<f64>,
    pub t: f64,
}

impl ProbabilityVector {
    pub fn point_mass(params: &KineticParams) -> Result<Self> {
        params.validate()?;
        let min = params.min_length();
        let states = (params.max_length() - min + 1) as usize;
        let mut p = vec![0.0; states];
        p[(params.initial_length - min) as usize] = 1.0;
        Ok(Self {
            min_length: min,
            p,
            t: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::InvalidInput("empty probability vector".into()));
        }
        if let Some(v) = self.p.iter().find(|v| !(**v >= -1e-12)) {
            return Err(Error::InvalidInput(format!("negative probability {v}")));
        }
        let sum: f64 = self.p.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn lengths(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.p.len()).map(|k| self.min_length + k as u32)
    }
}

/// Mean and variance of the filament length.
pub fn mean_and_variance(p: &ProbabilityVector) -> (f64, f64) {
    let mean: f64 = p.lengths().zip(&p.p).map(|(l, w)| l as f64 * w).sum();
    let var: f64 = p
        .lengths()
        .zip(&p.p)
        .map(|(l, w)| {
            let d = l as f64 - mean;
            d * d * w
        })
        .sum();
    (mean, var)
}

/// Expected number of free monomers under `p`.
pub fn mean_free_monomers(p: &ProbabilityVector, params: &KineticParams) -> f64 {
    p.lengths()
        .zip(&p.p)
        .map(|(l, w)| params.free_monomers_at(l) as f64 * w)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterScheme {
    /// L-stable TR-BDF2 with step-doubling error control.
    TrBdf2,
    /// Poisson-weighted powers of the uniformized jump matrix.
    Uniformization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterSolver {
    pub scheme: MasterScheme,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for MasterSolver {
    fn default() -> Self {
        Self {
            scheme: MasterScheme::TrBdf2,
            rtol: 1e-7,
            atol: 1e-11,
            max_steps: 5_000_000,
        }
    }
}

const DRIFT_LIMIT: f64 = 1e-6;

impl MasterSolver {
    pub fn with_scheme(scheme: MasterScheme) -> Self {
        Self {
            scheme,
            ..Self::default()
        }
    }

    /// Distributions at each of the sorted `times` (absolute, `>= p0.t`).
    pub fn solve(
        &self,
        p0: &ProbabilityVector,
        gen: &TransitionMatrix,
        times: &[f64],
    ) -> Result<Vec<ProbabilityVector>> {
        p0.validate()?;
        if p0.p.len() != gen.dim() || p0.min_length != gen.min_length {
            return Err(Error::InvalidInput(
                "probability vector does not match the generator's state space".into(),
            ));
        }
        let mut t = p0.t;
        for &s in times {
            if !s.is_finite() || s < t {
                return Err(Error::InvalidInput(format!(
                    "output times must be sorted and >= {}, got {s}",
                    p0.t
                )));
            }
            t = s;
        }
        let w = gen.to_tridiagonal();
        let mut state = p0.p.clone();
        let mut t = p0.t;
        let mut h = initial_step(gen);
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            match self.scheme {
                MasterScheme::TrBdf2 => {
                    h = self.advance_trbdf2(&w, &mut state, t, target, h)?;
                }
                MasterScheme::Uniformization => {
                    advance_uniformized(&w, gen.max_exit_rate(), &mut state, target - t);
                    renormalize(&mut state, target)?;
                }
            }
            t = target;
            out.push(ProbabilityVector {
                min_length: gen.min_length,
                p: state.clone(),
                t,
            });
        }
        Ok(out)
    }

    fn advance_trbdf2(&self, w: &Tridiagonal, y: &mut Vec<f64>, t0: f64, t1: f64, h0: f64) -> Result<f64> {
        let n = y.len();
        let mut ws = TrBdf2Workspace::new(n);
        let mut t = t0;
        let mut h = h0;
        let mut steps = 0usize;
        let mut full = vec![0.0; n];
        let mut half = vec![0.0; n];
        let mut two = vec![0.0; n];
        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            ws.step(w, y, step, &mut full);
            ws.step(w, y, step / 2.0, &mut half);
            ws.step(w, &half, step / 2.0, &mut two);
            let mut err: f64 = 0.0;
            for i in 0..n {
                let scale = self.atol + self.rtol * two[i].abs().max(y[i].abs());
                err = err.max((two[i] - full[i]).abs() / scale);
            }
            err /= 3.0;
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }
            if err <= 1.0 {
                std::mem::swap(y, &mut two);
                for v in y.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                t = if last { t1 } else { t + step };
                renormalize(y, t)?;
            }
            let factor = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 4.0) };
            // keep the previous working step when only the landing step was short
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h < 1e-300 || !h.is_finite() {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
        Ok(h)
    }
}

fn initial_step(gen: &TransitionMatrix) -> f64 {
    let rate = gen.max_exit_rate();
    if rate > 0.0 {
        0.1 / rate
    } else {
        1.0
    }
}

fn renormalize(y: &mut [f64], t: f64) -> Result<()> {
    let sum: f64 = y.iter().sum();
    let drift = (sum - 1.0).abs();
    if drift > DRIFT_LIMIT || !sum.is_finite() {
        return Err(Error::NormalizationDrift { t, drift });
    }
    y.iter_mut().for_each(|v| *v /= sum);
    Ok(())
}

struct TrBdf2Workspace {
    lhs: Tridiagonal,
    rhs: Vec<f64>,
    stage: Vec<f64>,
    scratch: Vec<f64>,
}

// gamma = 2 - sqrt(2) makes both implicit stages share one matrix.
const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;

impl TrBdf2Workspace {
    fn new(n: usize) -> Self {
        Self {
            lhs: Tridiagonal::zeros(n),
            rhs: vec![0.0; n],
            stage: vec![0.0; n],
            scratch: Vec::with_capacity(n),
        }
    }

    fn step(&mut self, w: &Tridiagonal, y: &[f64], h: f64, out: &mut [f64]) {
        let n = y.len();
        let c = GAMMA * h / 2.0;
        for i in 0..n {
            self.lhs.diag[i] = 1.0 - c * w.diag[i];
        }
        for i in 0..n.saturating_sub(1) {
            self.lhs.lower[i] = -c * w.lower[i];
            self.lhs.upper[i] = -c * w.upper[i];
        }
        // trapezoidal stage to t + gamma h
        w.matvec(y, &mut self.rhs);
        for i in 0..n {
            self.rhs[i] = y[i] + c * self.rhs[i];
        }
        self.lhs.solve(&self.rhs, &mut self.stage, &mut self.scratch);
        // BDF2 stage to t + h
        let w1 = 1.0 / (GAMMA * (2.0 - GAMMA));
        let w0 = (1.0 - GAMMA) * (1.0 - GAMMA) / (GAMMA * (2.0 - GAMMA));
        for i in 0..n {
            self.rhs[i] = w1 * self.stage[i] - w0 * y[i];
        }
        self.lhs.solve(&self.rhs, out, &mut self.scratch);
    }
}

/// `y <- exp(W dt) y` by uniformization, in chunks of at most `CHUNK`
/// expected jumps so the Poisson weights stay representable.
fn advance_uniformized(w: &Tridiagonal, max_rate: f64, y: &mut [f64], dt: f64) {
    const CHUNK: f64 = 20.0;
    const TAIL: f64 = 1e-15;
    if dt <= 0.0 || max_rate <= 0.0 {
        return;
    }
    let lambda = max_rate;
    let n = y.len();
    // P = I + W / lambda has nonnegative entries and unit column sums
    let mut jump = w.clone();
    for v in jump.diag.iter_mut() {
        *v = 1.0 + *v / lambda;
    }
    jump.lower.iter_mut().for_each(|v| *v /= lambda);
    jump.upper.iter_mut().for_each(|v| *v /= lambda);

    let chunks = (lambda * dt / CHUNK).ceil().max(1.0) as usize;
    let tau = dt / chunks as f64;
    let mean = lambda * tau;
    let mut term = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    for _ in 0..chunks {
        term.copy_from_slice(y);
        let mut weight = (-mean).exp();
        let mut cumulative = weight;
        for (a, v) in acc.iter_mut().zip(&term) {
            *a = weight * v;
        }
        let mut k = 0usize;
        while 1.0 - cumulative > TAIL && k < 10_000 {
            k += 1;
            jump.matvec(&term, &mut next);
            std::mem::swap(&mut term, &mut next);
            weight *= mean / k as f64;
            cumulative += weight;
            for (a, v) in acc.iter_mut().zip(&term) {
                *a += weight * v;
            }
        }
        y.copy_from_slice(&acc);
    }
}

pub fn integrate_master(p0: &ProbabilityVector, gen: &TransitionMatrix, t_end: f64) -> Result<ProbabilityVector> {
    let mut out = MasterSolver::default().solve(p0, gen, &[t_end])?;
    Ok(out.pop().expect("one output time"))
}
