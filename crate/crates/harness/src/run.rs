//! Scenario execution: one solver per config, outputs into one directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nanowire_core::fokker_planck::{
    fp_coefficients, solve_fp_pde_with, CoefficientMode, CoefficientRule, FpCoefficients, FpSolution, FpSolverOptions,
    InitialCondition,
};
use nanowire_core::kinetics::{analytic_concentration, critical_concentration, exact_concentration, integrate_ode_strided};
use nanowire_core::master::{build_generator_capped, mean_and_variance, mean_free_monomers, MasterScheme, MasterSolver, ProbabilityVector};
use nanowire_core::ssa::run_ensemble;
use nanowire_core::stability::{eigenvalues, jacobian, phase_field, Eigenvalues, PhaseForm, PhaseOptions, PhasePoint};
use nanowire_core::KineticParams;
use serde::Serialize;

use crate::config::{Interpretation, ScenarioConfig, SolverKind};
use crate::error::{Result, SolverContext};
use crate::output::{ensure_dir, write_json, write_text, Table};
use crate::plot::emit_plots;
use crate::report::{render_report, run_validation, ValidationReport};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    /// Free monomers, µM.
    pub n: f64,
    /// Polymerized monomers, µM.
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub at_initial: Eigenvalues,
    pub at_steady_state: Eigenvalues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeResult {
    pub t_end: f64,
    pub dt: f64,
    pub final_n: f64,
    pub final_a: f64,
    pub exact_final_n: f64,
    pub relaxation_law_final_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub trajectories: u64,
    pub seed: u64,
    pub final_t: f64,
    pub final_n_free_mean: f64,
    pub final_length_mean: f64,
    pub final_length_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterResult {
    pub scheme: MasterScheme,
    pub states: usize,
    pub final_t: f64,
    pub final_n_free_mean: f64,
    pub final_length_mean: f64,
    pub final_length_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpSnapshot {
    pub t: f64,
    pub mass: f64,
    pub absorbed: f64,
    pub mean: f64,
    pub variance: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpRun {
    pub label: String,
    pub drift: f64,
    pub diffusion: f64,
    pub peclet: f64,
    pub dt: f64,
    pub t_start: f64,
    pub max_mass_defect: f64,
    pub warnings: Vec<String>,
    pub snapshots: Vec<FpSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpResult {
    pub rule: CoefficientRule,
    pub mode: CoefficientMode,
    pub grid_size: usize,
    pub runs: Vec<FpRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEnd {
    pub start: PhasePoint,
    pub end: PhasePoint,
    pub distance_to_nullcline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub form: PhaseForm,
    pub tolerance: f64,
    pub trajectories: Vec<PhaseEnd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SolverResult {
    Ode(OdeResult),
    Ssa(EnsembleResult),
    Master(MasterResult),
    Fp(FpResult),
    Phase(PhaseResult),
    Validate(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub solver: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub interpretation: Interpretation,
    pub params: KineticParams,
    pub critical_concentration: f64,
    pub steady_state: SteadyState,
    pub elongation_rate: f64,
    pub diffusion_coefficient: f64,
    pub eigenvalues: Stability,
    pub result: SolverResult,
    /// Files written next to the summary, sorted.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Timing {
    wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub summary: Summary,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        t.write(&self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn evenly_spaced(t_end: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 {
        return vec![t_end];
    }
    (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect()
}

/// Runs the configured solver and writes its outputs to `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    run_scenario_in(cfg, &cfg.output_dir)
}

pub fn run_scenario_in(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutput> {
    let started = Instant::now();
    cfg.validate()?;
    let dir = ensure_dir(dir)?;
    let p = cfg.effective_params();
    let mut w = Writer {
        dir: dir.clone(),
        files: Vec::new(),
    };

    let (result, seed) = match cfg.solver {
        SolverKind::Ode => (SolverResult::Ode(run_ode(cfg, &p, &mut w)?), None),
        SolverKind::Ssa => {
            let r = run_ssa(cfg, &p, &mut w)?;
            let seed = r.seed;
            (SolverResult::Ssa(r), Some(seed))
        }
        SolverKind::Master => (SolverResult::Master(run_master(cfg, &p, &mut w)?), None),
        SolverKind::Fp => (SolverResult::Fp(run_fp(cfg, &p, &mut w)?), None),
        SolverKind::Phase => (SolverResult::Phase(run_phase(cfg, &p, &mut w)?), None),
        SolverKind::Validate => {
            let seed = cfg.validate.seed.expect("validated config has a seed");
            (SolverResult::Validate(run_validate(cfg, &p, seed, &mut w)?), Some(seed))
        }
    };

    if cfg.plots {
        w.files.extend(emit_plots(&dir)?);
    }
    w.files.sort();
    w.files.dedup();

    let k = critical_concentration(&p).context("summary")?;
    let c = fp_coefficients(&p).context("summary")?;
    let summary = Summary {
        solver: cfg.solver.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        interpretation: cfg.interpretation,
        params: p,
        critical_concentration: k,
        steady_state: SteadyState { n: k, a: p.n0 - k },
        elongation_rate: c.drift,
        diffusion_coefficient: c.diffusion,
        eigenvalues: Stability {
            at_initial: eigenvalues(&jacobian(p.n0, &p)).context("summary")?,
            at_steady_state: eigenvalues(&jacobian(k, &p)).context("summary")?,
        },
        result,
        files: w.files,
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    write_json(
        &dir.join(TIMING_FILE),
        &Timing {
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(RunOutput { dir, summary })
}

fn run_ode(cfg: &ScenarioConfig, p: &KineticParams, w: &mut Writer) -> Result<OdeResult> {
    let o = &cfg.ode;
    let traj = integrate_ode_strided(p, o.t_end, o.dt, o.stride).context("ode")?;
    let mut t = Table::new(&["t", "n", "a", "n_exact", "n_relaxation_law"]);
    for s in &traj {
        t.push(&[
            s.t,
            s.n,
            s.a,
            exact_concentration(s.t, p).context("ode")?,
            analytic_concentration(s.t, p).context("ode")?,
        ]);
    }
    w.table("ode.csv", &t)?;
    let last = traj.last().expect("trajectory is never empty");
    Ok(OdeResult {
        t_end: o.t_end,
        dt: o.dt,
        final_n: last.n,
        final_a: last.a,
        exact_final_n: exact_concentration(o.t_end, p).context("ode")?,
        relaxation_law_final_n: analytic_concentration(o.t_end, p).context("ode")?,
    })
}

fn run_ssa(cfg: &ScenarioConfig, p: &KineticParams, w: &mut Writer) -> Result<EnsembleResult> {
    let o = &cfg.ssa;
    let seed = o.seed.expect("validated config has a seed");
    let times = evenly_spaced(o.t_end, o.samples);
    let stats = run_ensemble(p, o.trajectories, &times, seed).context("ssa")?;
    let mut t = Table::new(&["t", "n_free_mean", "n_free_var", "length_mean", "length_var"]);
    for s in 0..times.len() {
        t.push(&[
            times[s],
            stats.n_free_mean[s],
            stats.n_free_var[s],
            stats.length_mean[s],
            stats.length_var[s],
        ]);
    }
    w.table("ensemble.csv", &t)?;
    let mut d = Table::new(&["t", "i", "probability"]);
    for (s, &ts) in times.iter().enumerate() {
        for (k, q) in stats.distribution(s).into_iter().enumerate() {
            d.push(&[ts, (stats.min_length as usize + k) as f64, q]);
        }
    }
    w.table("ssa_distribution.csv", &d)?;
    let last = times.len() - 1;
    Ok(EnsembleResult {
        trajectories: o.trajectories,
        seed,
        final_t: times[last],
        final_n_free_mean: stats.n_free_mean[last],
        final_length_mean: stats.length_mean[last],
        final_length_var: stats.length_var[last],
    })
}

fn run_master(cfg: &ScenarioConfig, p: &KineticParams, w: &mut Writer) -> Result<MasterResult> {
    let o = &cfg.master;
    let gen = build_generator_capped(p, o.max_states).context("master")?;
    let p0 = ProbabilityVector::point_mass(p).context("master")?;
    let times = evenly_spaced(o.t_end, o.samples);
    let sol = MasterSolver::with_scheme(o.scheme).solve(&p0, &gen, &times).context("master")?;
    let mut d = Table::new(&["t", "i", "probability"]);
    let mut m = Table::new(&["t", "n_free_mean", "length_mean", "length_var"]);
    for pv in &sol {
        for (l, q) in pv.lengths().zip(&pv.p) {
            d.push(&[pv.t, l as f64, *q]);
        }
        let (mean, var) = mean_and_variance(pv);
        m.push(&[pv.t, mean_free_monomers(pv, p), mean, var]);
    }
    w.table("master.csv", &d)?;
    w.table("master_moments.csv", &m)?;
    let last = sol.last().expect("at least one sample");
    let (mean, var) = mean_and_variance(last);
    Ok(MasterResult {
        scheme: o.scheme,
        states: gen.dim(),
        final_t: last.t,
        final_n_free_mean: mean_free_monomers(last, p),
        final_length_mean: mean,
        final_length_var: var,
    })
}

fn fp_tables(sol: &FpSolution, p: &KineticParams, analytic: Option<&FpCoefficients>, w: &mut Writer, suffix: &str) -> Result<Vec<FpSnapshot>> {
    let mut d = Table::new(&["t", "x", "p"]);
    let mut a = Table::new(&["t", "x", "p"]);
    let mut m = Table::new(&["t", "mass", "absorbed", "mean", "variance", "peak"]);
    let mut snaps = Vec::new();
    for (f, &absorbed) in sol.fields.iter().zip(&sol.absorbed) {
        for (&x, &v) in f.x.iter().zip(&f.p) {
            d.push(&[f.t, x, v]);
            if let Some(c) = analytic {
                a.push(&[f.t, x, c.density(x, f.t, p.x0)]);
            }
        }
        let snap = FpSnapshot {
            t: f.t,
            mass: f.mass(),
            absorbed,
            mean: f.mean(),
            variance: f.variance(),
            peak: f.peak(),
        };
        m.push(&[snap.t, snap.mass, snap.absorbed, snap.mean, snap.variance, snap.peak]);
        snaps.push(snap);
    }
    w.table(&format!("density{suffix}.csv"), &d)?;
    if analytic.is_some() {
        w.table(&format!("density_analytic{suffix}.csv"), &a)?;
    }
    w.table(&format!("fp_moments{suffix}.csv"), &m)?;
    Ok(snaps)
}

fn fp_run(label: &str, sol: &FpSolution, snapshots: Vec<FpSnapshot>) -> FpRun {
    FpRun {
        label: label.to_string(),
        drift: sol.coefficients.drift,
        diffusion: sol.coefficients.diffusion,
        peclet: sol.peclet,
        dt: sol.dt,
        t_start: sol.t_start,
        max_mass_defect: sol.max_mass_defect,
        warnings: sol.warnings.clone(),
        snapshots,
    }
}

fn run_fp(cfg: &ScenarioConfig, p: &KineticParams, w: &mut Writer) -> Result<FpResult> {
    let o = &cfg.fp;
    let mut opts = FpSolverOptions::new(o.grid_size);
    opts.courant = o.courant;
    opts.mode = o.mode;
    opts.rule = o.rule;
    let mut runs = Vec::new();
    if o.scenarios.is_empty() {
        opts.initial = InitialCondition::Emitted { sigma0: o.sigma0 };
        let sol = solve_fp_pde_with(p, &opts, &o.times).context("fp")?;
        // the free-space law only describes frozen coefficients
        let analytic = (o.mode == CoefficientMode::Frozen).then_some(sol.coefficients);
        let snaps = fp_tables(&sol, p, analytic.as_ref(), w, "")?;
        runs.push(fp_run("configured", &sol, snaps));
    } else {
        let mid = 0.5 * (p.x0 + p.x_l);
        let sigma = o.sigma0.unwrap_or(0.02 * (p.x_l - p.x0));
        opts.initial = InitialCondition::Gaussian { center: mid, sigma };
        let mut times = vec![0.0];
        times.extend(&o.times);
        for sc in &o.scenarios {
            let sp = sc.fp_params(p).context("fp scenario")?;
            let sol = solve_fp_pde_with(&sp, &opts, &times).context(sc.name())?;
            let snaps = fp_tables(&sol, &sp, None, w, &format!("_{}", sc.name()))?;
            runs.push(fp_run(sc.name(), &sol, snaps));
        }
    }
    Ok(FpResult {
        rule: o.rule,
        mode: o.mode,
        grid_size: o.grid_size,
        runs,
    })
}

fn run_phase(cfg: &ScenarioConfig, p: &KineticParams, w: &mut Writer) -> Result<PhaseResult> {
    let o = &cfg.phase;
    let mut opts = PhaseOptions::default_for(p);
    opts.t_end = o.t_end;
    opts.dt = o.dt;
    opts.stride = o.stride;
    opts.form = o.form;
    if let Some(g) = o.grid {
        opts.grid = g;
    }
    if let Some(pts) = &o.initial_points {
        opts.initial_points = pts.iter().map(|&[n, a]| PhasePoint::new(n, a)).collect();
    }
    let portrait = phase_field(p, &opts).context("phase")?;

    let mut f = Table::new(&["n", "a", "dn", "da"]);
    for a in &portrait.arrows {
        f.push(&[a.n, a.a, a.dn, a.da]);
    }
    w.table("phase_field.csv", &f)?;
    let mut t = Table::new(&["trajectory", "t", "n", "a"]);
    for (k, tr) in portrait.trajectories.iter().enumerate() {
        for (ts, pt) in tr.t.iter().zip(&tr.points) {
            t.push(&[k as f64, *ts, pt.n, pt.a]);
        }
    }
    w.table("phase_trajectories.csv", &t)?;
    let mut nc = Table::new(&["n", "a"]);
    for pt in &portrait.nullcline {
        nc.push(&[pt.n, pt.a]);
    }
    w.table("nullcline.csv", &nc)?;

    Ok(PhaseResult {
        form: o.form,
        tolerance: 1e-3 * p.n0,
        trajectories: portrait
            .trajectories
            .iter()
            .map(|tr| PhaseEnd {
                start: tr.points[0],
                end: *tr.points.last().expect("trajectory has a start point"),
                distance_to_nullcline: tr.final_distance,
            })
            .collect(),
    })
}

fn run_validate(cfg: &ScenarioConfig, p: &KineticParams, seed: u64, w: &mut Writer) -> Result<ValidationReport> {
    let report = run_validation(p, &cfg.validate, seed)?;
    let mut t = Table::new(&["check", "value", "threshold", "passed"]);
    for c in &report.checks {
        t.push_labeled(&[&c.name], &[c.value, c.threshold, if c.passed { 1.0 } else { 0.0 }]);
    }
    w.table("validation.csv", &t)?;
    let mut d = Table::new(&["layer", "scenario", "drift", "tolerance"]);
    for r in &report.drifts {
        d.push_labeled(&[r.layer, r.scenario], &[r.drift, r.tolerance]);
    }
    w.table("scenario_drift.csv", &d)?;
    let lattice_params = {
        let mut lp = KineticParams::reference();
        lp.n0 = cfg.validate.lattice_n_total as f64;
        lp.volume_factor = 1.0;
        lp
    };
    let mut o = Table::new(&["t", "i", "x", "master", "fp"]);
    for row in &report.lattice {
        for (k, (m, f)) in row.master.iter().zip(&row.fp).enumerate() {
            if *m > 1e-12 || *f > 1e-12 {
                let i = lattice_params.min_length() + k as u32;
                o.push(&[row.t, i as f64, lattice_params.position_of(i), *m, *f]);
            }
        }
    }
    w.table("lattice_overlay.csv", &o)?;
    w.text("validation_report.md", &render_report(&report))?;
    Ok(report)
}
