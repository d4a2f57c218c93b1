//! Mean-field kinetics of the pointed-end elongation reaction.
//!
//! Free monomers `n` are consumed as `dn/dt = -2 k+ n^2 + k-` and the
//! polymerized pool `a` gains exactly what `n` loses. The exponential
//! relaxation law (`(n0 - K) e^{-2 k+ t} + K`) is kept alongside the
//! closed-form Riccati solution so the two can be compared; the RK4
//! integration is the reference for cross-layer checks.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::params::KineticParams;

/// Default RK4 step, s.
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterministicState {
    /// Free-monomer concentration, µM.
    pub n: f64,
    /// Polymerized-monomer concentration, µM.
    pub a: f64,
    pub t: f64,
}

impl DeterministicState {
    pub fn initial(params: &KineticParams) -> Self {
        Self {
            n: params.n0,
            a: 0.0,
            t: 0.0,
        }
    }
}

/// Right-hand side `(dn/dt, da/dt)` in µM/s.
pub fn ode_rhs(state: &DeterministicState, params: &KineticParams) -> (f64, f64) {
    let dn = -2.0 * params.k_plus * state.n * state.n + params.k_minus;
    (dn, -dn)
}

/// `K = sqrt(k- / 2k+)`, the free-monomer level at which polymerization
/// and depolymerization balance.
pub fn critical_concentration(params: &KineticParams) -> Result<f64> {
    if params.k_plus == 0.0 {
        return Err(invalid("k_plus", "critical concentration undefined for k_plus = 0"));
    }
    if params.k_plus < 0.0 || params.k_minus < 0.0 {
        return Err(invalid("k_plus", "rates must be nonnegative"));
    }
    Ok((params.k_minus / (2.0 * params.k_plus)).sqrt())
}

/// Exponential relaxation toward `K`.
pub fn analytic_concentration(t: f64, params: &KineticParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let k = critical_concentration(params)?;
    Ok((params.n0 - k) * (-2.0 * params.k_plus * t).exp() + k)
}

/// Closed-form solution of `dn/dt = 2k+ (K^2 - n^2)` from `n(0) = n0`.
pub fn exact_concentration(t: f64, params: &KineticParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let k = critical_concentration(params)?;
    let n0 = params.n0;
    if k == 0.0 {
        return Ok(n0 / (1.0 + 2.0 * params.k_plus * n0 * t));
    }
    let s = (2.0 * params.k_plus * k * t).tanh();
    Ok(k * (n0 + k * s) / (k + n0 * s))
}

/// One classical RK4 step for a planar autonomous system. Fails with the
/// offending value when any stage or the result has a negative first
/// coordinate.
pub(crate) fn rk4_step<F>(f: &F, y: [f64; 2], h: f64) -> std::result::Result<[f64; 2], f64>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(y);
    let y2 = add(y, k1, h / 2.0);
    if y2[0] < 0.0 {
        return Err(y2[0]);
    }
    let k2 = f(y2);
    let y3 = add(y, k2, h / 2.0);
    if y3[0] < 0.0 {
        return Err(y3[0]);
    }
    let k3 = f(y3);
    let y4 = add(y, k3, h);
    if y4[0] < 0.0 {
        return Err(y4[0]);
    }
    let k4 = f(y4);
    let next = [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    if next[0] < 0.0 {
        return Err(next[0]);
    }
    Ok(next)
}

/// Fixed-step RK4 from `(n0, 0)` to `t_end`, emitting every step. The last
/// step is shortened so the final state lands on `t_end`.
pub fn integrate_ode(params: &KineticParams, t_end: f64, dt: f64) -> Result<Vec<DeterministicState>> {
    integrate_from(DeterministicState::initial(params), params, t_end, dt, 1)
}

/// Like [`integrate_ode`] but keeps only every `stride`-th step (plus the
/// endpoints).
pub fn integrate_ode_strided(
    params: &KineticParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<DeterministicState>> {
    integrate_from(DeterministicState::initial(params), params, t_end, dt, stride.max(1))
}

fn integrate_from(
    start: DeterministicState,
    params: &KineticParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<DeterministicState>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!("t_end must be >= 0, got {t_end}")));
    }
    let field = |y: [f64; 2]| {
        let (dn, da) = ode_rhs(
            &DeterministicState {
                n: y[0],
                a: y[1],
                t: 0.0,
            },
            params,
        );
        [dn, da]
    };
    let steps = (t_end / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps / stride + 2);
    out.push(start);
    let mut y = [start.n, start.a];
    let mut t = start.t;
    for i in 0..steps {
        let t_next = if i + 1 == steps {
            t_end
        } else {
            start.t + (i + 1) as f64 * dt
        };
        let h = t_next - t;
        if h <= 0.0 {
            continue;
        }
        y = rk4_step(&field, y, h).map_err(|value| Error::StepRejected { t, dt: h, value })?;
        t = t_next;
        if (i + 1) % stride == 0 || i + 1 == steps {
            out.push(DeterministicState { n: y[0], a: y[1], t });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> KineticParams {
        KineticParams::reference()
    }

    #[test]
    fn rhs_examples() {
        let p = reference();
        let k = critical_concentration(&p).unwrap();
        let (dn, da) = ode_rhs(&DeterministicState { n: k, a: p.n0 - k, t: 0.0 }, &p);
        assert!(dn.abs() < 1e-15, "{dn}");
        assert_eq!(da, -dn);

        let (dn, _) = ode_rhs(&DeterministicState { n: 0.0, a: p.n0, t: 0.0 }, &p);
        assert_eq!(dn, 0.166);

        let (dn, _) = ode_rhs(&DeterministicState { n: 1.0, a: 999.0, t: 0.0 }, &p);
        assert_relative_eq!(dn, -1.792, max_relative = 1e-14);
    }

    #[test]
    fn critical_concentration_examples() {
        let mut p = reference();
        assert_relative_eq!(critical_concentration(&p).unwrap(), 0.2911707199413682, max_relative = 1e-15);
        p.k_minus = 0.0;
        assert_eq!(critical_concentration(&p).unwrap(), 0.0);
        p.k_plus = 0.5;
        p.k_minus = 0.5;
        assert_relative_eq!(critical_concentration(&p).unwrap(), 0.7071067811865476, max_relative = 1e-15);
        p.k_plus = 0.0;
        assert!(critical_concentration(&p).is_err());
    }

    #[test]
    fn analytic_examples() {
        let p = reference();
        assert_eq!(analytic_concentration(0.0, &p).unwrap(), 1000.0);
        assert_relative_eq!(analytic_concentration(1.0, &p).unwrap(), 141.39049442996802, max_relative = 1e-13);
        let k = critical_concentration(&p).unwrap();
        assert_relative_eq!(analytic_concentration(1e3, &p).unwrap(), k, max_relative = 1e-15);
        assert!(analytic_concentration(-1.0, &p).is_err());
    }

    #[test]
    fn exact_solution_matches_high_precision_reference() {
        // reference values from a 40-digit Taylor ODE integration
        let p = reference();
        for (t, want) in [
            (0.001, 338.06634135079654048),
            (0.01, 48.59144644274260035),
            (0.1, 5.0868611886657500698),
            (1.0, 0.56466132358595878639),
            (5.0, 0.29312241403372259778),
        ] {
            assert_relative_eq!(exact_concentration(t, &p).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_solution_without_depolymerization() {
        let mut p = reference();
        p.k_minus = 0.0;
        let t = 0.25;
        let want = p.n0 / (1.0 + 2.0 * p.k_plus * p.n0 * t);
        assert_relative_eq!(exact_concentration(t, &p).unwrap(), want, max_relative = 1e-15);
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let p = reference();
        let out = integrate_ode(&p, 0.0, DEFAULT_DT).unwrap();
        assert_eq!(out, vec![DeterministicState { n: 1000.0, a: 0.0, t: 0.0 }]);
    }

    #[test]
    fn rk4_tracks_closed_form() {
        let p = reference();
        let out = integrate_ode(&p, 2.0, DEFAULT_DT).unwrap();
        for s in out.iter().step_by(997) {
            let exact = exact_concentration(s.t, &p).unwrap();
            assert_relative_eq!(s.n, exact, max_relative = 1e-6);
        }
        assert_eq!(out.last().unwrap().t, 2.0);
    }

    #[test]
    fn converges_to_critical_concentration() {
        let p = reference();
        let out = integrate_ode_strided(&p, 20.0, DEFAULT_DT, 1000).unwrap();
        let k = critical_concentration(&p).unwrap();
        assert_relative_eq!(out.last().unwrap().n, k, max_relative = 1e-6);
    }

    #[test]
    fn conservation_and_monotone_decay() {
        let p = reference();
        let out = integrate_ode(&p, 5.0, DEFAULT_DT).unwrap();
        for w in out.windows(2) {
            assert!(w[1].n < w[0].n);
            assert!(w[1].t > w[0].t);
        }
        for s in &out {
            assert!(((s.n + s.a) - p.n0).abs() <= 1e-9 * p.n0);
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        // h*lambda = -3.9 at n0 = 1000 is outside the RK4 stability interval
        let p = reference();
        let err = integrate_ode(&p, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::StepRejected { .. }));
    }

    #[test]
    fn bad_step_sizes() {
        let p = reference();
        assert!(integrate_ode(&p, 1.0, 0.0).is_err());
        assert!(integrate_ode(&p, 1.0, -1.0).is_err());
        assert!(integrate_ode(&p, f64::NAN, 1e-3).is_err());
    }
}
