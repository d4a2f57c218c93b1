//! Phase plane, nullcline and linear stability of the monomer kinetics.
//!
//! Two vector fields are available. [`PhaseForm::Coupled`] feeds
//! depolymerization from the polymer pool,
//!
//! ```text
//! dn/dt = -2 k+ n² + k- a,   da/dt = -dn/dt
//! ```
//!
//! whose nullcline is `n = K sqrt(a)`. [`PhaseForm::Uncoupled`] is the
//! mean-field ODE of [`crate::kinetics`], with a constant `k-` source; its
//! trajectories settle at `n = K` instead.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kinetics::{critical_concentration, rk4_step};
use crate::params::KineticParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub n: f64,
    pub a: f64,
}

impl PhasePoint {
    pub fn new(n: f64, a: f64) -> Self {
        Self { n, a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseForm {
    #[default]
    Coupled,
    Uncoupled,
}

/// `K sqrt(a)`.
pub fn nullcline(a: f64, params: &KineticParams) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::InvalidInput(format!("a must be >= 0, got {a}")));
    }
    Ok(critical_concentration(params)? * a.sqrt())
}

/// `(dn/dt, da/dt)` at `point`.
pub fn phase_rhs(point: PhasePoint, params: &KineticParams, form: PhaseForm) -> (f64, f64) {
    let source = match form {
        PhaseForm::Coupled => params.k_minus * point.a,
        PhaseForm::Uncoupled => params.k_minus,
    };
    let dn = -2.0 * params.k_plus * point.n * point.n + source;
    (dn, -dn)
}

pub type Matrix2 = [[f64; 2]; 2];

/// Linearization of the mean-field kinetics in `(n, a)`.
pub fn jacobian(n: f64, params: &KineticParams) -> Matrix2 {
    let j = -4.0 * params.k_plus * n;
    [[j, 0.0], [-j, 0.0]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    /// Both eigenvalues zero.
    Degenerate,
    /// One zero and one negative eigenvalue.
    StableNotAsymptotically,
    AsymptoticallyStable,
    Unstable,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Degenerate => "degenerate",
            Self::StableNotAsymptotically => "stable, not asymptotically",
            Self::AsymptoticallyStable => "asymptotically stable",
            Self::Unstable => "unstable",
        })
    }
}

impl Serialize for StabilityClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalues {
    /// Larger eigenvalue.
    pub lambda1: f64,
    pub lambda2: f64,
    pub class: StabilityClass,
}

/// Real eigenvalues of a 2×2 matrix. Triangular input is read off the
/// diagonal, so the kinetics Jacobian gives `0` and `-4 k+ n` exactly.
pub fn eigenvalues(m: &Matrix2) -> Result<Eigenvalues> {
    let (l1, l2) = if m[0][1] == 0.0 || m[1][0] == 0.0 {
        (m[0][0], m[1][1])
    } else {
        let half_tr = 0.5 * (m[0][0] + m[1][1]);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = half_tr * half_tr - det;
        if disc < 0.0 {
            return Err(Error::ComplexEigenvalues);
        }
        let r = disc.sqrt();
        // avoid cancellation in the smaller-magnitude root
        let big = if half_tr >= 0.0 { half_tr + r } else { half_tr - r };
        let small = if big == 0.0 { 0.0 } else { det / big };
        (big, small)
    };
    let (lambda1, lambda2) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
    let class = if lambda1 > 0.0 {
        StabilityClass::Unstable
    } else if lambda1 < 0.0 {
        StabilityClass::AsymptoticallyStable
    } else if lambda2 < 0.0 {
        StabilityClass::StableNotAsymptotically
    } else {
        StabilityClass::Degenerate
    };
    Ok(Eigenvalues { lambda1, lambda2, class })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityInputs {
    /// Magnetic-field intensity, mT.
    pub m_field: f64,
    /// Enzyme concentration, µM.
    pub enzyme: f64,
    /// Nanowire length, m.
    pub length: f64,
}

/// `M E / L`, arbitrary units.
pub fn stability_index(inputs: &StabilityInputs) -> Result<f64> {
    if inputs.length == 0.0 {
        return Err(invalid("length", "stability index undefined for zero length"));
    }
    for (name, v) in [("m_field", inputs.m_field), ("enzyme", inputs.enzyme), ("length", inputs.length)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    Ok(inputs.m_field * inputs.enzyme / inputs.length)
}

/// Euclidean distance from `p` to the curve `n = K sqrt(a)`, `a >= 0`.
///
/// With `u = sqrt(a)` the squared distance is `(K u - n)² + (u² - a)²`;
/// its stationary points solve `u³ + (K²/2 - a) u - K n / 2 = 0`.
pub fn nullcline_distance(p: PhasePoint, k: f64) -> f64 {
    let dist = |u: f64| ((k * u - p.n).powi(2) + (u * u - p.a).powi(2)).sqrt();
    let mut best = dist(0.0);
    for u in cubic_real_roots((k * k - 2.0 * p.a) / 2.0, -k * p.n / 2.0) {
        if u >= 0.0 {
            best = best.min(dist(u));
        }
    }
    best
}

/// Real roots of `u³ + p u + q`.
fn cubic_real_roots(p: f64, q: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![(-q).cbrt()];
    }
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub n_min: f64,
    pub n_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub n_points: usize,
    pub a_points: usize,
}

impl PhaseGrid {
    /// `[0, n0]²` with 15 × 15 arrows.
    pub fn default_for(params: &KineticParams) -> Self {
        Self {
            n_min: 0.0,
            n_max: params.n0,
            a_min: 0.0,
            a_max: params.n0,
            n_points: 15,
            a_points: 15,
        }
    }

    fn axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
        if k == 1 {
            return vec![lo];
        }
        (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    pub grid: PhaseGrid,
    pub initial_points: Vec<PhasePoint>,
    pub t_end: f64,
    pub dt: f64,
    /// Keep every `stride`-th step of each trajectory.
    pub stride: usize,
    pub form: PhaseForm,
    /// Points on the sampled nullcline curve.
    pub nullcline_points: usize,
}

impl PhaseOptions {
    /// Five starts `(f n0, 0)`, `f = 0.2 .. 1.0`, integrated for 5 s.
    pub fn default_for(params: &KineticParams) -> Self {
        Self {
            grid: PhaseGrid::default_for(params),
            initial_points: (1..=5)
                .map(|i| PhasePoint::new(params.n0 * 0.2 * i as f64, 0.0))
                .collect(),
            t_end: 5.0,
            dt: crate::kinetics::DEFAULT_DT,
            stride: 100,
            form: PhaseForm::Coupled,
            nullcline_points: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arrow {
    pub n: f64,
    pub a: f64,
    pub dn: f64,
    pub da: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTrajectory {
    pub t: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Distance of the last point to the nullcline.
    pub final_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePortrait {
    pub arrows: Vec<Arrow>,
    pub trajectories: Vec<PhaseTrajectory>,
    pub nullcline: Vec<PhasePoint>,
    pub critical_concentration: f64,
}

pub fn phase_field(params: &KineticParams, opts: &PhaseOptions) -> Result<PhasePortrait> {
    params.validate()?;
    let g = &opts.grid;
    if g.n_min < 0.0 || g.a_min < 0.0 || g.n_max < g.n_min || g.a_max < g.a_min {
        return Err(Error::InvalidInput("phase grid must be nonnegative and ordered".into()));
    }
    if g.n_points == 0 || g.a_points == 0 {
        return Err(Error::InvalidInput("phase grid needs at least one point per axis".into()));
    }
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) {
        return Err(Error::InvalidInput("dt must be > 0 and t_end >= 0".into()));
    }
    let k = critical_concentration(params)?;

    let mut arrows = Vec::with_capacity(g.n_points * g.a_points);
    for &a in &PhaseGrid::axis(g.a_min, g.a_max, g.a_points) {
        for &n in &PhaseGrid::axis(g.n_min, g.n_max, g.n_points) {
            let (dn, da) = phase_rhs(PhasePoint::new(n, a), params, opts.form);
            arrows.push(Arrow { n, a, dn, da });
        }
    }

    let nullcline = PhaseGrid::axis(g.a_min, g.a_max, opts.nullcline_points.max(2))
        .into_iter()
        .map(|a| PhasePoint::new(k * a.sqrt(), a))
        .collect();

    let trajectories = opts
        .initial_points
        .iter()
        .map(|&start| integrate_phase(start, params, opts, k))
        .collect::<Result<_>>()?;

    Ok(PhasePortrait {
        arrows,
        trajectories,
        nullcline,
        critical_concentration: k,
    })
}

fn integrate_phase(start: PhasePoint, params: &KineticParams, opts: &PhaseOptions, k: f64) -> Result<PhaseTrajectory> {
    if start.n < 0.0 || start.a < 0.0 {
        return Err(Error::InvalidInput("initial points must be nonnegative".into()));
    }
    let f = |y: [f64; 2]| {
        let (dn, da) = phase_rhs(PhasePoint::new(y[0], y[1]), params, opts.form);
        [dn, da]
    };
    let stride = opts.stride.max(1);
    let steps = (opts.t_end / opts.dt).ceil() as usize;
    let mut y = [start.n, start.a];
    let mut t = 0.0;
    let mut ts = vec![0.0];
    let mut pts = vec![start];
    for i in 1..=steps {
        let t_next = if i == steps { opts.t_end } else { i as f64 * opts.dt };
        let h = t_next - t;
        y = rk4_step(&f, y, h).map_err(|value| Error::StepRejected { t, dt: h, value })?;
        t = t_next;
        if i % stride == 0 || i == steps {
            ts.push(t);
            pts.push(PhasePoint::new(y[0], y[1]));
        }
    }
    let last = *pts.last().expect("trajectory has a start point");
    Ok(PhaseTrajectory {
        t: ts,
        points: pts,
        final_distance: nullcline_distance(last, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nullcline_values() {
        let p = KineticParams::reference();
        assert_eq!(nullcline(0.0, &p).unwrap(), 0.0);
        assert_eq!(nullcline(1.0, &p).unwrap(), critical_concentration(&p).unwrap());
        assert_relative_eq!(nullcline(4.0, &p).unwrap(), 0.5823414398827364, max_relative = 1e-15);
        assert!(nullcline(-1.0, &p).is_err());
    }

    #[test]
    fn jacobian_and_eigenvalues() {
        let p = KineticParams::reference();
        let j = jacobian(1000.0, &p);
        assert_eq!(j[0][0], -3916.0);
        assert_eq!([j[0][1], j[1][1]], [0.0, 0.0]);
        let e = eigenvalues(&j).unwrap();
        assert_eq!((e.lambda1, e.lambda2), (0.0, -3916.0));
        assert_eq!(e.class.to_string(), "stable, not asymptotically");
        let z = eigenvalues(&jacobian(0.0, &p)).unwrap();
        assert_eq!((z.lambda1, z.lambda2), (0.0, 0.0));
        assert_eq!(z.class, StabilityClass::Degenerate);
    }

    #[test]
    fn general_eigenvalues() {
        let e = eigenvalues(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_relative_eq!(e.lambda1, 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.lambda2, 1.0, max_relative = 1e-15);
        assert_eq!(e.class, StabilityClass::Unstable);
        assert_eq!(eigenvalues(&[[0.0, -1.0], [1.0, 0.0]]), Err(Error::ComplexEigenvalues));
    }

    #[test]
    fn stability_index_scaling() {
        let base = StabilityInputs { m_field: 22.0, enzyme: 1.0, length: 1.0 };
        assert_eq!(stability_index(&base).unwrap(), 22.0);
        let doubled = StabilityInputs { m_field: 44.0, ..base };
        assert_eq!(stability_index(&doubled).unwrap(), 44.0);
        let longer = StabilityInputs { length: 2.0, ..base };
        assert_eq!(stability_index(&longer).unwrap(), 11.0);
        assert!(stability_index(&StabilityInputs { length: 0.0, ..base }).is_err());
        assert!(stability_index(&StabilityInputs { enzyme: -1.0, ..base }).is_err());
    }

    #[test]
    fn distance_is_zero_on_the_curve() {
        let k = 0.3;
        for a in [0.0, 0.5, 4.0, 900.0] {
            let d = nullcline_distance(PhasePoint::new(k * f64::sqrt(a), a), k);
            assert!(d < 1e-9 * (1.0 + a), "a = {a}: {d}");
        }
    }

    #[test]
    fn distance_matches_brute_force() {
        let k = 0.29;
        for p in [PhasePoint::new(5.0, 3.0), PhasePoint::new(0.0, 10.0), PhasePoint::new(200.0, 0.0), PhasePoint::new(1.0, 400.0)] {
            let brute = (0..=400_000)
                .map(|i| {
                    let u = i as f64 * 1e-4;
                    ((k * u - p.n).powi(2) + (u * u - p.a).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            let d = nullcline_distance(p, k);
            assert!(d <= brute + 1e-12 && brute - d < 1e-3, "{p:?}: {d} vs {brute}");
        }
    }

    #[test]
    fn default_trajectories_reach_the_nullcline() {
        let p = KineticParams::reference();
        let portrait = phase_field(&p, &PhaseOptions::default_for(&p)).unwrap();
        assert_eq!(portrait.trajectories.len(), 5);
        for tr in &portrait.trajectories {
            assert!(tr.final_distance < 1e-3 * p.n0, "{}", tr.final_distance);
        }
        for a in &portrait.arrows {
            assert_eq!(a.da, -a.dn);
        }
    }

    #[test]
    fn uncoupled_trajectories_stop_at_critical_level() {
        let p = KineticParams::reference();
        let opts = PhaseOptions {
            form: PhaseForm::Uncoupled,
            // relaxation near K runs at 4 k+ K ≈ 1.1 /s
            t_end: 20.0,
            ..PhaseOptions::default_for(&p)
        };
        let portrait = phase_field(&p, &opts).unwrap();
        let k = portrait.critical_concentration;
        for tr in &portrait.trajectories {
            let last = tr.points.last().unwrap();
            assert!((last.n - k).abs() < 1e-3 * k);
        }
    }

    #[test]
    fn empty_trajectory_list() {
        let p = KineticParams::reference();
        let opts = PhaseOptions {
            initial_points: vec![],
            ..PhaseOptions::default_for(&p)
        };
        let portrait = phase_field(&p, &opts).unwrap();
        assert!(portrait.trajectories.is_empty());
        assert_eq!(portrait.arrows.len(), 225);
        assert_eq!(portrait.nullcline.len(), 101);
    }
}
