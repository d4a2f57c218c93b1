//! Grid solver for the drift-diffusion equation on `[x0, x_l]`.
//!
//! Crank-Nicolson in time with a fourth-order compact spatial operator.
//! Using the equation itself to eliminate the leading truncation terms of
//! the central differences gives, per node,
//!
//! ```text
//! [1 + dx²/12 δ² - Pe dx/12 δ₀] p_t = [D (1 + Pe²/12) δ² - E δ₀] p
//! ```
//!
//! (`Pe = E dx / D`, `δ²` and `δ₀` the second-order central operators).
//! Both sides are written as differences of face fluxes so the discrete mass
//! plus the absorbed flux is conserved to rounding. The transmitter face
//! carries zero flux; the receiver node is held at zero and everything
//! crossing into it is booked as absorbed.

use serde::{Deserialize, Serialize};

use super::{CoefficientRule, DensityField, FpCoefficients};
use crate::error::{Error, Result};
use crate::params::KineticParams;
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Narrow Gaussian leaving the transmitter: the free-space solution at
    /// the time its standard deviation equals `sigma0` (default 8 cells).
    Emitted { sigma0: Option<f64> },
    /// Gaussian with the given center and width at `t = 0`.
    Gaussian { center: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Coefficients evaluated once at the initial monomer level.
    #[default]
    Frozen,
    /// Monomer level follows the mean-field kinetics.
    TimeDependent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpSolverOptions {
    pub grid_size: usize,
    /// Fixed time step; derived from `courant` and the initial width if unset.
    pub dt: Option<f64>,
    pub courant: f64,
    pub initial: InitialCondition,
    pub mode: CoefficientMode,
    pub rule: CoefficientRule,
}

impl FpSolverOptions {
    pub fn new(grid_size: usize) -> Self {
        Self {
            grid_size,
            dt: None,
            courant: 0.1,
            initial: InitialCondition::Emitted { sigma0: None },
            mode: CoefficientMode::Frozen,
            rule: CoefficientRule::Printed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpSolution {
    pub fields: Vec<DensityField>,
    /// Mass absorbed at the receiver by each sample time.
    pub absorbed: Vec<f64>,
    /// Largest per-step change of interior mass plus absorbed mass.
    pub max_mass_defect: f64,
    pub coefficients: FpCoefficients,
    pub peclet: f64,
    pub t_start: f64,
    pub dt: f64,
    pub warnings: Vec<String>,
}

pub fn solve_fp_pde(params: &KineticParams, grid_size: usize, t_samples: &[f64]) -> Result<FpSolution> {
    solve_fp_pde_with(params, &FpSolverOptions::new(grid_size), t_samples)
}

struct Operators {
    mass: Tridiagonal,
    stiff: Tridiagonal,
    /// outflow face: flux = alpha_out * u_last, correction = g_out * u_last
    alpha_out: f64,
    g_out: f64,
}

fn operators(c: &FpCoefficients, dx: f64, unknowns: usize) -> Operators {
    let pe = c.peclet(dx);
    let dm = c.diffusion * (1.0 + pe * pe / 12.0);
    let a = 1.0 / 12.0;
    let b = pe / 24.0;
    let alpha = c.drift / 2.0 + dm / dx;
    let beta = c.drift / 2.0 - dm / dx;
    let n = unknowns;
    let mut mass = Tridiagonal::zeros(n);
    let mut stiff = Tridiagonal::zeros(n);
    for j in 0..n {
        if j == 0 {
            mass.diag[0] = dx * (0.5 - a - b);
            stiff.diag[0] = -alpha;
        } else {
            mass.diag[j] = dx * (1.0 - 2.0 * a);
            stiff.diag[j] = beta - alpha;
            mass.lower[j - 1] = dx * (a + b);
            stiff.lower[j - 1] = alpha;
        }
        if j + 1 < n {
            mass.upper[j] = dx * (a - b);
            stiff.upper[j] = -beta;
        }
    }
    Operators {
        mass,
        stiff,
        alpha_out: alpha,
        g_out: a + b,
    }
}

fn gaussian(x: f64, center: f64, sigma: f64) -> f64 {
    let z = (x - center) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

pub fn solve_fp_pde_with(params: &KineticParams, opts: &FpSolverOptions, t_samples: &[f64]) -> Result<FpSolution> {
    params.validate()?;
    if opts.grid_size < 32 {
        return Err(Error::InvalidInput(format!("grid_size must be >= 32, got {}", opts.grid_size)));
    }
    if !(opts.courant > 0.0) {
        return Err(Error::InvalidInput("courant number must be > 0".into()));
    }
    let n_nodes = opts.grid_size;
    let dx = (params.x_l - params.x0) / (n_nodes - 1) as f64;
    let x: Vec<f64> = (0..n_nodes).map(|i| params.x0 + i as f64 * dx).collect();
    let unknowns = n_nodes - 1;

    let coeff_at = |t: f64| -> Result<FpCoefficients> {
        match opts.mode {
            CoefficientMode::Frozen => FpCoefficients::initial(opts.rule, params),
            CoefficientMode::TimeDependent => FpCoefficients::at_time(t, opts.rule, params),
        }
    };
    let c0 = coeff_at(0.0)?;

    let (t_start, center, sigma) = match opts.initial {
        InitialCondition::Emitted { sigma0 } => {
            let sigma = sigma0.unwrap_or(8.0 * dx);
            if !(sigma > 0.0) {
                return Err(Error::InvalidInput("initial width must be > 0".into()));
            }
            let t0 = sigma * sigma / (2.0 * c0.diffusion);
            (t0, params.x0 + c0.drift * t0, sigma)
        }
        InitialCondition::Gaussian { center, sigma } => {
            if !(sigma > 0.0) {
                return Err(Error::InvalidInput("initial width must be > 0".into()));
            }
            (0.0, center, sigma)
        }
    };
    let mut t_prev = t_start;
    for &t in t_samples {
        if !t.is_finite() || t < t_prev {
            return Err(Error::InvalidInput(format!(
                "sample times must be sorted and >= the start time {t_start}, got {t}"
            )));
        }
        t_prev = t;
    }

    let dt = match opts.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}"))),
        None => {
            let diffusive = 0.05 * sigma * sigma / c0.diffusion;
            if c0.drift != 0.0 {
                (opts.courant * dx / c0.drift.abs()).min(diffusive)
            } else {
                diffusive
            }
        }
    };

    let mut warnings = Vec::new();
    let peclet = c0.peclet(dx);
    if peclet.abs() > 2.0 {
        warnings.push(format!(
            "grid Peclet number {peclet:.3} exceeds 2; refine the grid (dx = {dx:e} m)"
        ));
    }

    // initial density, renormalized to unit trapezoidal mass on the grid
    let mut u: Vec<f64> = x[..unknowns].iter().map(|&xi| gaussian(xi, center, sigma)).collect();
    let weight = |j: usize| if j == 0 { dx / 2.0 } else { dx };
    let interior = |u: &[f64]| -> f64 { u.iter().enumerate().map(|(j, v)| weight(j) * v).sum() };
    let m0 = interior(&u);
    if !(m0 > 0.0) {
        return Err(Error::InvalidInput("initial density has no mass on the grid".into()));
    }
    u.iter_mut().for_each(|v| *v /= m0);

    let mut fields = Vec::with_capacity(t_samples.len());
    let mut absorbed_out = Vec::with_capacity(t_samples.len());
    let mut absorbed = 0.0;
    let mut max_defect: f64 = 0.0;
    let mut t = t_start;
    let mut rhs = vec![0.0; unknowns];
    let mut tmp = vec![0.0; unknowns];
    let mut next = vec![0.0; unknowns];
    let mut scratch = Vec::with_capacity(unknowns);
    let mut frozen_ops = None;

    for &target in t_samples {
        let span = target - t;
        let steps = if span > 0.0 { (span / dt).ceil() as usize } else { 0 };
        for s in 0..steps {
            let t_next = if s + 1 == steps { target } else { t + dt };
            let h = t_next - t;
            if h <= 0.0 {
                continue;
            }
            let ops_owned;
            let ops = match opts.mode {
                CoefficientMode::Frozen => frozen_ops.get_or_insert_with(|| operators(&c0, dx, unknowns)),
                CoefficientMode::TimeDependent => {
                    let c = coeff_at(t + h / 2.0)?;
                    ops_owned = operators(&c, dx, unknowns);
                    &ops_owned
                }
            };
            // (A - h/2 K) u' = (A + h/2 K) u
            ops.mass.matvec(&u, &mut rhs);
            ops.stiff.matvec(&u, &mut tmp);
            rhs.iter_mut().zip(&tmp).for_each(|(r, k)| *r += h / 2.0 * k);
            let mut lhs = ops.mass.clone();
            lhs.diag.iter_mut().zip(&ops.stiff.diag).for_each(|(a, k)| *a -= h / 2.0 * k);
            lhs.lower.iter_mut().zip(&ops.stiff.lower).for_each(|(a, k)| *a -= h / 2.0 * k);
            lhs.upper.iter_mut().zip(&ops.stiff.upper).for_each(|(a, k)| *a -= h / 2.0 * k);
            lhs.solve(&rhs, &mut next, &mut scratch);

            let before = interior(&u) + absorbed;
            let last_old = u[unknowns - 1];
            let last_new = next[unknowns - 1];
            let outflow = h * ops.alpha_out * (last_old + last_new) / 2.0;
            let correction = dx * ops.g_out * (last_new - last_old);
            absorbed += outflow - correction;
            std::mem::swap(&mut u, &mut next);
            let after = interior(&u) + absorbed;
            max_defect = max_defect.max((after - before).abs());
            t = t_next;
        }
        t = target;
        let mut p = u.clone();
        p.push(0.0);
        fields.push(DensityField {
            x: x.clone(),
            p,
            t,
        });
        absorbed_out.push(absorbed);
    }

    Ok(FpSolution {
        fields,
        absorbed: absorbed_out,
        max_mass_defect: max_defect,
        coefficients: c0,
        peclet,
        t_start,
        dt,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn matches_free_space_solution_before_contact() {
        let p = KineticParams::reference();
        let sol = solve_fp_pde(&p, 1024, &[0.1, 0.3, 0.5]).unwrap();
        let c = sol.coefficients;
        for f in &sol.fields {
            let exact: Vec<f64> = f.x.iter().map(|&x| c.density(x, f.t, p.x0)).collect();
            let err = relative_l2(&f.p, &exact);
            assert!(err < 1e-3, "t = {}: {err}", f.t);
        }
        assert!(sol.warnings.is_empty());
    }

    #[test]
    fn mass_is_conserved_per_step() {
        let p = KineticParams::reference();
        // long enough that a large share reaches the receiver
        let sol = solve_fp_pde(&p, 512, &[0.2, 0.9, 1.2]).unwrap();
        assert!(sol.max_mass_defect < 1e-6, "{}", sol.max_mass_defect);
        for (f, a) in sol.fields.iter().zip(&sol.absorbed) {
            assert!((f.mass() + a - 1.0).abs() < 1e-9);
        }
        assert!(sol.absorbed[2] > 0.5);
        assert!(sol.absorbed.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn pure_diffusion_stays_symmetric() {
        let mut p = KineticParams::reference();
        p.k_minus = p.k_plus * p.n0;
        let mid = 0.5 * (p.x0 + p.x_l);
        let opts = FpSolverOptions {
            initial: InitialCondition::Gaussian { center: mid, sigma: 2e-7 },
            dt: Some(1e-3),
            ..FpSolverOptions::new(513)
        };
        let sol = solve_fp_pde_with(&p, &opts, &[0.5, 2.0]).unwrap();
        for f in &sol.fields {
            let n = f.p.len();
            // the two ends have different boundary conditions
            for i in 1..150 {
                let (l, r) = (f.p[n / 2 - i], f.p[n / 2 + i]);
                assert!((l - r).abs() <= 1e-9 * f.p[n / 2], "asymmetry at offset {i}");
            }
        }
    }

    #[test]
    fn small_grids_are_rejected() {
        let p = KineticParams::reference();
        assert!(solve_fp_pde(&p, 16, &[0.1]).is_err());
    }

    #[test]
    fn samples_before_emission_are_rejected() {
        let p = KineticParams::reference();
        assert!(solve_fp_pde(&p, 256, &[1e-6]).is_err());
    }

    #[test]
    fn coarse_grid_warns_about_peclet_number() {
        let mut p = KineticParams::reference();
        p.k_minus = 0.0;
        let opts = FpSolverOptions {
            initial: InitialCondition::Gaussian { center: 3e-6, sigma: 1e-6 },
            ..FpSolverOptions::new(32)
        };
        let sol = solve_fp_pde_with(&p, &opts, &[]).unwrap();
        assert!(sol.peclet > 2.0);
        assert_eq!(sol.warnings.len(), 1);
    }

    #[test]
    fn time_dependent_coefficients_slow_the_front() {
        let p = KineticParams::reference();
        let frozen = solve_fp_pde(&p, 512, &[0.3]).unwrap();
        let opts = FpSolverOptions {
            mode: CoefficientMode::TimeDependent,
            ..FpSolverOptions::new(512)
        };
        let varying = solve_fp_pde_with(&p, &opts, &[0.3]).unwrap();
        assert!(varying.fields[0].mean() < frozen.fields[0].mean());
        assert!(varying.max_mass_defect < 1e-6);
    }
}
