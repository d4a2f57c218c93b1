//! Gillespie direct-method simulation of filament elongation.
//!
//! The state is a pair of integers: free monomers in the bath and filament
//! length. Two reactions act on the pointed end:
//!
//! | reaction          | propensity              | stoichiometry (n_free, length) |
//! |-------------------|-------------------------|--------------------------------|
//! | polymerization    | `k+ n (n - 1) / 2`      | (-1, +1)                       |
//! | depolymerization  | `k-` (0 at the floor)   | (+1, -1)                       |
//!
//! The floor (nucleus + 1 monomer) reflects and the receiver length
//! absorbs. Each trajectory owns a ChaCha8 stream selected by its index, so
//! ensembles are bit-reproducible under any thread schedule; moments are
//! accumulated as exact integer sums for the same reason.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::KineticParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemState {
    pub n_free: u64,
    pub length: u32,
}

impl SystemState {
    pub fn initial(params: &KineticParams) -> Self {
        Self {
            n_free: params.n_total(),
            length: params.initial_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Polymerization,
    Depolymerization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Both propensities vanished.
    Quiescent,
    /// The tip reached the receiver.
    ReceiverReached,
    /// The time horizon passed first.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Fired {
        state: SystemState,
        event: Event,
        waiting_time: f64,
    },
    Terminal(Termination),
}

pub fn propensity_polymerization(n_free: u64, params: &KineticParams) -> f64 {
    if n_free < 2 {
        return 0.0;
    }
    let n = n_free as f64;
    params.k_plus * n * (n - 1.0) / 2.0
}

pub fn propensity_depolymerization(state: &SystemState, params: &KineticParams) -> f64 {
    if state.length > params.min_length() {
        params.k_minus
    } else {
        0.0
    }
}

/// Draws the next reaction. The receiver length is absorbing, so no event
/// fires from it.
pub fn ssa_step<R: Rng + ?Sized>(state: &SystemState, params: &KineticParams, rng: &mut R) -> StepOutcome {
    if state.length >= params.max_length() {
        return StepOutcome::Terminal(Termination::ReceiverReached);
    }
    let a_poly = propensity_polymerization(state.n_free, params);
    let a_depoly = propensity_depolymerization(state, params);
    let total = a_poly + a_depoly;
    if total <= 0.0 {
        return StepOutcome::Terminal(Termination::Quiescent);
    }
    // 1 - u lies in (0, 1], so the log is finite
    let u: f64 = rng.random();
    let waiting_time = -(1.0 - u).ln() / total;
    let pick: f64 = rng.random::<f64>() * total;
    let (state, event) = if pick < a_poly {
        (
            SystemState {
                n_free: state.n_free - 1,
                length: state.length + 1,
            },
            Event::Polymerization,
        )
    } else {
        (
            SystemState {
                n_free: state.n_free + 1,
                length: state.length - 1,
            },
            Event::Depolymerization,
        )
    };
    StepOutcome::Fired {
        state,
        event,
        waiting_time,
    }
}

/// Generator for trajectory `index` of an ensemble seeded with `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub state: SystemState,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub rng_seed: u64,
    pub stream: u64,
    pub initial: SystemState,
    pub events: Vec<EventRecord>,
    pub termination: Termination,
}

impl Trajectory {
    /// State in force at time `t` (piecewise constant, right-continuous).
    pub fn state_at(&self, t: f64) -> SystemState {
        let idx = self.events.partition_point(|e| e.t <= t);
        if idx == 0 {
            self.initial
        } else {
            self.events[idx - 1].state
        }
    }

    pub fn final_state(&self) -> SystemState {
        self.events.last().map_or(self.initial, |e| e.state)
    }

    pub fn count(&self, event: Event) -> usize {
        self.events.iter().filter(|e| e.event == event).count()
    }
}

/// Runs one trajectory until `t_end`, absorption or quiescence.
pub fn simulate_trajectory(params: &KineticParams, t_end: f64, seed: u64, index: u64) -> Result<Trajectory> {
    params.validate()?;
    check_horizon(t_end)?;
    let mut rng = trajectory_rng(seed, index);
    let initial = SystemState::initial(params);
    let mut events = Vec::new();
    let mut state = initial;
    let mut t = 0.0;
    let termination = loop {
        match ssa_step(&state, params, &mut rng) {
            StepOutcome::Terminal(reason) => break reason,
            StepOutcome::Fired {
                state: next,
                event,
                waiting_time,
            } => {
                t += waiting_time;
                if t > t_end {
                    break Termination::Horizon;
                }
                state = next;
                events.push(EventRecord { t, state, event });
            }
        }
    };
    Ok(Trajectory {
        rng_seed: seed,
        stream: index,
        initial,
        events,
        termination,
    })
}

/// Samples a trajectory at sorted `times` without storing its events.
fn sample_path<R: Rng>(params: &KineticParams, times: &[f64], rng: &mut R, out: &mut [SystemState]) {
    let mut state = SystemState::initial(params);
    let mut t = 0.0;
    let mut next_sample = 0;
    while next_sample < times.len() {
        match ssa_step(&state, params, rng) {
            StepOutcome::Terminal(_) => break,
            StepOutcome::Fired {
                state: next,
                waiting_time,
                ..
            } => {
                t += waiting_time;
                while next_sample < times.len() && times[next_sample] < t {
                    out[next_sample] = state;
                    next_sample += 1;
                }
                state = next;
            }
        }
    }
    for slot in &mut out[next_sample..] {
        *slot = state;
    }
}

/// Exact integer moment sums at each sample time. Merging is associative and
/// commutative, so the reduction order never changes the result.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Accumulator {
    count: u64,
    n_sum: Vec<u128>,
    n_sq: Vec<u128>,
    len_sum: Vec<u128>,
    len_sq: Vec<u128>,
    /// `histograms[s][length - min_length]`
    histograms: Vec<Vec<u64>>,
}

impl Accumulator {
    fn new(samples: usize, states: usize) -> Self {
        Self {
            count: 0,
            n_sum: vec![0; samples],
            n_sq: vec![0; samples],
            len_sum: vec![0; samples],
            len_sq: vec![0; samples],
            histograms: vec![vec![0; states]; samples],
        }
    }

    fn push(&mut self, path: &[SystemState], min_length: u32) {
        self.count += 1;
        for (s, st) in path.iter().enumerate() {
            let n = st.n_free as u128;
            let l = st.length as u128;
            self.n_sum[s] += n;
            self.n_sq[s] += n * n;
            self.len_sum[s] += l;
            self.len_sq[s] += l * l;
            self.histograms[s][(st.length - min_length) as usize] += 1;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        let add = |a: &mut Vec<u128>, b: &[u128]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.n_sum, &other.n_sum);
        add(&mut self.n_sq, &other.n_sq);
        add(&mut self.len_sum, &other.len_sum);
        add(&mut self.len_sq, &other.len_sq);
        for (h, o) in self.histograms.iter_mut().zip(&other.histograms) {
            h.iter_mut().zip(o).for_each(|(x, y)| *x += y);
        }
        self
    }
}

fn moments(count: u64, sum: u128, sq: u128) -> (f64, f64) {
    let n = count as u128;
    let mean = sum as f64 / count as f64;
    // n * sq - sum^2 >= 0 by Cauchy-Schwarz; exact in integers
    let spread = n * sq - sum * sum;
    let var = spread as f64 / (count as f64 * count as f64);
    (mean, var)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub sample_times: Vec<f64>,
    pub n_free_mean: Vec<f64>,
    pub n_free_var: Vec<f64>,
    pub length_mean: Vec<f64>,
    pub length_var: Vec<f64>,
    pub n_traj: u64,
    pub seed: u64,
    pub min_length: u32,
    /// Empirical length histograms, `histograms[s][length - min_length]`.
    pub histograms: Vec<Vec<u64>>,
}

impl EnsembleStats {
    /// Empirical length distribution at sample `s`, indexed from `min_length`.
    pub fn distribution(&self, s: usize) -> Vec<f64> {
        let n = self.n_traj as f64;
        self.histograms[s].iter().map(|&c| c as f64 / n).collect()
    }

    /// Standard error of the mean length at sample `s`.
    pub fn length_standard_error(&self, s: usize) -> f64 {
        (self.length_var[s] / self.n_traj as f64).sqrt()
    }
}

/// `n_traj` independent trajectories sampled at the sorted `sample_times`.
/// Trajectory `i` draws from stream `i` of `seed`.
pub fn run_ensemble(params: &KineticParams, n_traj: u64, sample_times: &[f64], seed: u64) -> Result<EnsembleStats> {
    params.validate()?;
    if n_traj == 0 {
        return Err(Error::InvalidInput("n_traj must be >= 1".into()));
    }
    if sample_times.is_empty() {
        return Err(Error::InvalidInput("at least one sample time is required".into()));
    }
    for &t in sample_times {
        check_horizon(t)?;
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("sample times must be sorted".into()));
    }
    let min_length = params.min_length();
    let states = (params.max_length() - min_length + 1) as usize;
    let samples = sample_times.len();

    let acc = (0..n_traj)
        .into_par_iter()
        .fold(
            || (Accumulator::new(samples, states), vec![SystemState::initial(params); samples]),
            |(mut acc, mut buf), i| {
                let mut rng = trajectory_rng(seed, i);
                sample_path(params, sample_times, &mut rng, &mut buf);
                acc.push(&buf, min_length);
                (acc, buf)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| Accumulator::new(samples, states), Accumulator::merge);

    let mut stats = EnsembleStats {
        sample_times: sample_times.to_vec(),
        n_free_mean: Vec::with_capacity(samples),
        n_free_var: Vec::with_capacity(samples),
        length_mean: Vec::with_capacity(samples),
        length_var: Vec::with_capacity(samples),
        n_traj,
        seed,
        min_length,
        histograms: acc.histograms,
    };
    for s in 0..samples {
        let (m, v) = moments(acc.count, acc.n_sum[s], acc.n_sq[s]);
        stats.n_free_mean.push(m);
        stats.n_free_var.push(v);
        let (m, v) = moments(acc.count, acc.len_sum[s], acc.len_sq[s]);
        stats.length_mean.push(m);
        stats.length_var.push(v);
    }
    Ok(stats)
}

fn check_horizon(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time must be finite and >= 0, got {t}")))
    }
}
