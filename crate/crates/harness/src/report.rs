//! Cross-layer validation: each check compares a model layer against an
//! independent oracle and records the metric next to its threshold.

use std::time::Instant;

use nanowire_core::compare::{master_vs_fp, ssa_master_distance, weak_depletion_horizon, LatticeComparison};
use nanowire_core::fokker_planck::{
    fp_coefficients, solve_fp_pde, solve_fp_pde_with, CoefficientRule, FpCoefficients, FpSolverOptions, InitialCondition,
};
use nanowire_core::kinetics::{analytic_concentration, critical_concentration, integrate_ode_strided, DEFAULT_DT};
use nanowire_core::master::{build_generator, mean_free_monomers, MasterSolver, ProbabilityVector};
use nanowire_core::scenario::RateScenario;
use nanowire_core::ssa::run_ensemble;
use nanowire_core::stability::{eigenvalues, jacobian, nullcline, phase_field, phase_rhs, PhaseForm, PhaseOptions, PhasePoint};
use nanowire_core::KineticParams;
use serde::Serialize;

use crate::config::ValidateOptions;
use crate::error::{Result, SolverContext};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
    /// Wall time of the check, s. Not written to deterministic outputs.
    #[serde(skip)]
    pub elapsed: f64,
}

impl Check {
    fn upper(name: &str, metric: &str, value: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            metric: metric.into(),
            value,
            threshold,
            passed: value <= threshold,
            detail,
            elapsed: 0.0,
        }
    }

    fn timed(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed().as_secs_f64();
        self
    }
}

/// Mean-field kinetics: RK4 settles at `K` and agrees with the closed-form
/// relaxation law at the start and at convergence.
pub fn check_steady_state(params: &KineticParams) -> Result<Check> {
    let start = Instant::now();
    let t_end = 10.0;
    let traj = integrate_ode_strided(params, t_end, DEFAULT_DT, 1000).context("ode")?;
    let k = critical_concentration(params).context("ode")?;
    let last = traj.last().expect("trajectory is never empty");
    let to_k = (last.n - k).abs() / k;
    let law0 = analytic_concentration(0.0, params).context("ode")?;
    let law_end = analytic_concentration(t_end, params).context("ode")?;
    let to_law = (last.n - law_end).abs() / law_end;
    let exact_start = law0 == traj[0].n;
    let value = if exact_start { to_k.max(to_law) } else { f64::INFINITY };
    Ok(Check::upper(
        "steady_state",
        "max relative error of n(t_end) vs K and vs relaxation law",
        value,
        1e-3,
        format!(
            "K = {k}, n({t_end} s) = {}, law(0) == n0: {exact_start}, rel. err vs K {to_k:.3e}, vs law {to_law:.3e}",
            last.n
        ),
    )
    .timed(start))
}

pub struct SmallSystem {
    pub params: KineticParams,
    pub times: Vec<f64>,
    pub tv_times: [usize; 3],
}

/// `n_total` free monomers with the receiver at length `max_length`.
pub fn small_system(n_total: u32, max_length: u32) -> SmallSystem {
    let mut p = KineticParams::reference();
    p.n0 = n_total as f64;
    p.volume_factor = 1.0;
    let p = p.with_max_length(max_length);
    let t_end = 0.04;
    let times: Vec<f64> = (0..=20).map(|i| t_end * i as f64 / 20.0).collect();
    SmallSystem {
        params: p,
        times,
        tv_times: [5, 10, 15],
    }
}

/// Stochastic ensemble against the master equation on a small system:
/// pointwise relative error of the mean free-monomer count, and total
/// variation of the length distribution at three times.
pub fn check_ssa_vs_master(opts: &ValidateOptions, seed: u64) -> Result<(Check, Check)> {
    let start = Instant::now();
    let sys = small_system(opts.small_n_total, opts.small_max_length);
    let p = &sys.params;
    let stats = run_ensemble(p, opts.trajectories, &sys.times, seed).context("ssa ensemble")?;
    let gen = build_generator(p).context("master")?;
    let p0 = ProbabilityVector::point_mass(p).context("master")?;
    let sol = MasterSolver::default().solve(&p0, &gen, &sys.times).context("master")?;
    let mut worst_mean = 0.0f64;
    for (s, pv) in sol.iter().enumerate() {
        let exact = mean_free_monomers(pv, p);
        worst_mean = worst_mean.max((stats.n_free_mean[s] - exact).abs() / exact);
    }
    let mut tvs = Vec::new();
    for &s in &sys.tv_times {
        tvs.push(ssa_master_distance(&stats, s, &sol[s]).context("compare")?);
    }
    let worst_tv = tvs.iter().cloned().fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "n_total = {}, receiver length {}, {} trajectories, seed {seed}",
        opts.small_n_total, opts.small_max_length, opts.trajectories
    );
    let mut mean = Check::upper(
        "ssa_vs_master_mean",
        "max pointwise relative error of mean free monomers",
        worst_mean,
        0.05,
        detail.clone(),
    );
    mean.elapsed = elapsed;
    let times: Vec<String> = sys.tv_times.iter().map(|&s| format!("{}", sys.times[s])).collect();
    let mut tv = Check::upper(
        "ssa_vs_master_tv",
        "max total variation of length distribution",
        worst_tv,
        0.02,
        format!("{detail}, t = [{}], tv = {tvs:?}", times.join(", ")),
    );
    tv.elapsed = elapsed;
    Ok((mean, tv))
}

/// Free-space drift-diffusion solution against the grid solver, and its
/// first two moments against `x0 + E t` and `2 D t`.
pub fn check_fp_pde(params: &KineticParams, grid_size: usize) -> Result<(Check, Check)> {
    let start = Instant::now();
    let times = [0.1, 0.3, 0.5];
    let sol = solve_fp_pde(params, grid_size, &times).context("fp pde")?;
    let c = sol.coefficients;
    let mut worst_l2 = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut moments = Vec::new();
    for f in &sol.fields {
        let exact: Vec<f64> = f.x.iter().map(|&x| c.density(x, f.t, params.x0)).collect();
        let num: f64 = f.p.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = exact.iter().map(|b| b * b).sum();
        worst_l2 = worst_l2.max((num / den).sqrt());
        let mean_err = (f.mean() - (params.x0 + c.drift * f.t)).abs() / (params.x0 + c.drift * f.t);
        let var_err = (f.variance() - 2.0 * c.diffusion * f.t).abs() / (2.0 * c.diffusion * f.t);
        worst_moment = worst_moment.max(mean_err).max(var_err);
        moments.push(format!("t={}: mean {:.3e}, var {:.3e}", f.t, mean_err, var_err));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut l2 = Check::upper(
        "fp_pde_l2",
        "max relative L2 error vs analytic density",
        worst_l2,
        1e-3,
        format!("{grid_size} points, E = {}, D = {}, dt = {}", c.drift, c.diffusion, sol.dt),
    );
    l2.elapsed = elapsed;
    let mut mom = Check::upper(
        "fp_pde_moments",
        "max relative error of mean and variance",
        worst_moment,
        1e-6,
        moments.join("; "),
    );
    mom.elapsed = elapsed;
    Ok((l2, mom))
}

/// Master equation mapped onto positions against the drift-diffusion
/// density built from the pair propensity, at desk scale.
pub fn lattice_comparison(n_total: u32) -> Result<(KineticParams, Vec<LatticeComparison>)> {
    let mut p = KineticParams::reference();
    p.n0 = n_total as f64;
    p.volume_factor = 1.0;
    let horizon = weak_depletion_horizon(&p, CoefficientRule::PairCount, 0.05).context("compare")?;
    let times = [horizon / 4.0, horizon / 2.0, horizon];
    let rows = master_vs_fp(&p, CoefficientRule::PairCount, &times).context("master vs fp")?;
    Ok((p, rows))
}

pub fn check_master_vs_fp(n_total: u32) -> Result<(Check, Vec<LatticeComparison>)> {
    let start = Instant::now();
    let (_, rows) = lattice_comparison(n_total)?;
    let worst_tv = rows.iter().map(|r| r.total_variation).fold(0.0, f64::max);
    let worst_mode = rows.iter().map(|r| r.mode_offset()).max().unwrap_or(0);
    let value = if worst_mode <= 1 { worst_tv } else { f64::INFINITY };
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("t={:.4e}: tv {:.4}, modes {}/{}", r.t, r.total_variation, r.master_mode, r.fp_mode))
        .collect();
    Ok((
        Check::upper(
            "master_vs_fp_tv",
            "max total variation (mode offset <= 1 cell required)",
            value,
            0.1,
            format!("n_total = {n_total}; {}", detail.join("; ")),
        )
        .timed(start),
        rows,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftRow {
    pub layer: &'static str,
    pub scenario: &'static str,
    pub drift: f64,
    /// Three standard errors (SSA) or the zero tolerance (FP), m.
    pub tolerance: f64,
    pub sign_ok: bool,
}

fn sign_ok(drift: f64, tol: f64, expected: i8) -> bool {
    match expected {
        1 => drift > tol,
        -1 => drift < -tol,
        _ => drift.abs() < tol,
    }
}

/// Mean tip displacement in the three rate regimes on both layers.
pub fn scenario_drifts(seed: u64, trajectories: u64) -> Result<Vec<DriftRow>> {
    let mut rows = Vec::new();

    let mut base = KineticParams::reference();
    base.n0 = 100.0;
    base.volume_factor = 1.0;
    base.initial_length = 50;
    let t = 2e-3;
    for sc in RateScenario::ALL {
        let p = sc.ssa_params(&base).context("scenario")?;
        let stats = run_ensemble(&p, trajectories, &[0.0, t], seed).context("scenario ssa")?;
        let drift = (stats.length_mean[1] - stats.length_mean[0]) * p.delta;
        let tol = 3.0 * stats.length_standard_error(1) * p.delta;
        rows.push(DriftRow {
            layer: "ssa",
            scenario: sc.name(),
            drift,
            tolerance: tol,
            sign_ok: sign_ok(drift, tol, sc.drift_sign()),
        });
    }

    let base = KineticParams::reference();
    let mid = 0.5 * (base.x0 + base.x_l);
    for sc in RateScenario::ALL {
        let p = sc.fp_params(&base).context("scenario")?;
        let opts = FpSolverOptions {
            initial: InitialCondition::Gaussian { center: mid, sigma: 2e-7 },
            ..FpSolverOptions::new(512)
        };
        let sol = solve_fp_pde_with(&p, &opts, &[0.0, 0.2]).context("scenario fp")?;
        let drift = sol.fields[1].mean() - sol.fields[0].mean();
        let spread = (sol.fields[1].variance()).sqrt();
        let tol = 1e-6 * spread;
        rows.push(DriftRow {
            layer: "fp",
            scenario: sc.name(),
            drift,
            tolerance: tol,
            sign_ok: sign_ok(drift, tol, sc.drift_sign()),
        });
    }
    Ok(rows)
}

pub fn check_scenarios(seed: u64, trajectories: u64) -> Result<(Check, Vec<DriftRow>)> {
    let start = Instant::now();
    let rows = scenario_drifts(seed, trajectories)?;
    let failures = rows.iter().filter(|r| !r.sign_ok).count();
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("{}/{}: {:.3e} (tol {:.1e})", r.layer, r.scenario, r.drift, r.tolerance))
        .collect();
    Ok((
        Check::upper(
            "scenario_drift_signs",
            "scenarios with the wrong drift sign",
            failures as f64,
            0.0,
            detail.join("; "),
        )
        .timed(start),
        rows,
    ))
}

/// Default trajectories against the nullcline, plus the residual of the
/// coupled field on the nullcline itself.
pub fn check_phase(params: &KineticParams) -> Result<(Check, Check)> {
    let start = Instant::now();
    let portrait = phase_field(params, &PhaseOptions::default_for(params)).context("phase")?;
    let worst = portrait.trajectories.iter().map(|t| t.final_distance).fold(0.0, f64::max);
    let tol = 1e-3 * params.n0;
    let mut residual = 0.0f64;
    for i in 0..=1000 {
        let a = params.n0 * i as f64 / 1000.0;
        let n = nullcline(a, params).context("phase")?;
        let (dn, _) = phase_rhs(PhasePoint::new(n, a), params, PhaseForm::Coupled);
        residual = residual.max(dn.abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut conv = Check::upper(
        "phase_convergence",
        "max final distance to nullcline / (1e-3 n0)",
        worst / tol,
        1.0,
        format!("{} trajectories, worst distance {worst:.3e}", portrait.trajectories.len()),
    );
    conv.elapsed = elapsed;
    let mut fixed = Check::upper(
        "nullcline_fixed_points",
        "max |dn/dt| on the nullcline, a in [0, n0]",
        residual,
        1e-12,
        "coupled field".into(),
    );
    fixed.elapsed = elapsed;
    Ok((conv, fixed))
}

/// Closed-form eigenvalues at 100 quasi-random monomer levels in `(0, n0]`.
pub fn check_eigenvalues(params: &KineticParams) -> Result<Check> {
    let start = Instant::now();
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 1..=100 {
        let n = params.n0 * ((i as f64 * golden).fract() + 1e-3).min(1.0);
        let e = eigenvalues(&jacobian(n, params)).context("eigenvalues")?;
        let l2 = -4.0 * params.k_plus * n;
        exact &= e.lambda1 == 0.0 && e.lambda2 == l2;
        let char_poly = e.lambda2 * e.lambda2 + 4.0 * params.k_plus * n * e.lambda2;
        worst = worst.max(char_poly.abs() / (l2 * l2));
    }
    let value = if exact { worst } else { f64::INFINITY };
    Ok(Check::upper(
        "eigenvalues",
        "max relative characteristic-polynomial residual (exact roots required)",
        value,
        4.0 * f64::EPSILON,
        "lambda1 = 0, lambda2 = -4 k+ N".into(),
    )
    .timed(start))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inversion {
    pub target_distance: f64,
    pub target_time: f64,
    /// Elongation speed required, m/s.
    pub required_drift: f64,
    /// `k+ N0 - k-` required, s⁻¹.
    pub required_net_rate: f64,
    /// Time for the configured parameters to cover the target distance, s.
    pub crossing_time: f64,
    /// Free-monomer concentration giving the required rate with jump rate
    /// `k+ N0`, µM.
    pub concentration_reading: f64,
    /// Counts per µM that would make the configured `n0` a molecule count
    /// equal to that concentration.
    pub volume_factor_reading: f64,
    /// Free-monomer count giving the required rate with the pair
    /// propensity `k+ N (N - 1) / 2`.
    pub pair_count_reading: f64,
}

pub fn invert_crossing(params: &KineticParams, opts: &ValidateOptions) -> Result<Inversion> {
    let c = fp_coefficients(params).context("inversion")?;
    let required_drift = opts.target_distance / opts.target_time;
    let net = required_drift / params.delta;
    let conc = (net + params.k_minus) / params.k_plus;
    // k+ N (N - 1) / 2 = net + k-
    let m = 2.0 * (net + params.k_minus) / params.k_plus;
    let pair = 0.5 * (1.0 + (1.0 + 4.0 * m).sqrt());
    Ok(Inversion {
        target_distance: opts.target_distance,
        target_time: opts.target_time,
        required_drift,
        required_net_rate: net,
        crossing_time: opts.target_distance / c.drift,
        concentration_reading: conc,
        volume_factor_reading: params.n0 / conc,
        pair_count_reading: pair,
    })
}

/// Mean-position law on the grid solver over a long horizon before
/// receiver contact, plus the inversion.
pub fn check_mean_position(params: &KineticParams, opts: &ValidateOptions) -> Result<(Check, Inversion)> {
    let start = Instant::now();
    let c: FpCoefficients = fp_coefficients(params).context("mean position")?;
    let sol = solve_fp_pde(params, opts.fp_grid_size, &[0.1, 0.2, 0.3, 0.4, 0.5]).context("mean position")?;
    let worst = sol
        .fields
        .iter()
        .map(|f| (f.mean() - params.x0 - c.drift * f.t).abs() / (c.drift * f.t))
        .fold(0.0, f64::max);
    let inv = invert_crossing(params, opts)?;
    Ok((
        Check::upper(
            "mean_position_law",
            "max relative error of displacement vs E t",
            worst,
            1e-6,
            format!(
                "required k+N0 - k- = {:.4} /s for {} m in {} s; configured rates cross in {:.4} s",
                inv.required_net_rate, inv.target_distance, inv.target_time, inv.crossing_time
            ),
        )
        .timed(start),
        inv,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub drifts: Vec<DriftRow>,
    pub lattice: Vec<LatticeComparison>,
    pub inversion: Inversion,
    pub all_passed: bool,
}

pub fn run_validation(params: &KineticParams, opts: &ValidateOptions, seed: u64) -> Result<ValidationReport> {
    let mut checks = vec![check_steady_state(params)?];
    let (mean, tv) = check_ssa_vs_master(opts, seed)?;
    checks.extend([mean, tv]);
    let (l2, mom) = check_fp_pde(params, opts.fp_grid_size)?;
    checks.extend([l2, mom]);
    let (lat, lattice) = check_master_vs_fp(opts.lattice_n_total)?;
    checks.push(lat);
    let (sc, drifts) = check_scenarios(seed, 2000)?;
    checks.push(sc);
    let (conv, fixed) = check_phase(params)?;
    checks.extend([conv, fixed]);
    checks.push(check_eigenvalues(params)?);
    let (mp, inversion) = check_mean_position(params, opts)?;
    checks.push(mp);
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        checks,
        drifts,
        lattice,
        inversion,
        all_passed,
    })
}

/// Plain-text rendering of the report.
pub fn render_report(r: &ValidationReport) -> String {
    let mut s = String::from("# Validation report\n\n| check | value | threshold | result |\n|---|---|---|---|\n");
    for c in &r.checks {
        s += &format!(
            "| {} | {:.6e} | {:.1e} | {} |\n",
            c.name,
            c.value,
            c.threshold,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    s += "\n## Details\n\n";
    for c in &r.checks {
        s += &format!("- {} ({}): {}\n", c.name, c.metric, c.detail);
    }
    let inv = &r.inversion;
    s += &format!(
        "\n## Crossing-time inversion\n\n\
         Covering {} m in {} s needs an elongation speed of {:.6e} m/s, i.e. \
         k+ N0 - k- = {:.6} /s.\n\n\
         - Reading N0 as a concentration with jump rate k+ N0: N0 = {:.6} µM.\n\
         - Reading the configured n0 as a molecule count: {:.4} counts per µM reproduce that concentration.\n\
         - With the pair propensity k+ N (N - 1) / 2: N = {:.4} molecules.\n\
         - The configured rates cover the same distance in {:.6} s.\n",
        inv.target_distance,
        inv.target_time,
        inv.required_drift,
        inv.required_net_rate,
        inv.concentration_reading,
        inv.volume_factor_reading,
        inv.pair_count_reading,
        inv.crossing_time
    );
    s += "\n## Field forms\n\n\
          The mean-field ODE has a constant depolymerization source and settles at n = K. \
          The phase-plane field feeds depolymerization from the polymer pool (k- a) and has \
          the nullcline n = K sqrt(a). The phase checks use the latter.\n";
    s
}
