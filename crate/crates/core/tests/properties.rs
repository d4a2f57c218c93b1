use nanowire_core::compare::total_variation;
use nanowire_core::fokker_planck::{dtm_inverse, dtm_transform, fp_coefficients, Polynomial2};
use nanowire_core::kinetics::integrate_ode_strided;
use nanowire_core::master::{build_generator, MasterSolver, ProbabilityVector};
use nanowire_core::ssa::simulate_trajectory;
use nanowire_core::stability::{eigenvalues, jacobian, nullcline, phase_rhs, stability_index, PhaseForm, PhasePoint, StabilityInputs};
use nanowire_core::KineticParams;
use proptest::prelude::*;

fn small_system() -> impl Strategy<Value = KineticParams> {
    (0.1f64..2.0, 0.0f64..50.0, 5u32..40, 10u32..60).prop_map(|(kp, km, n, lmax)| {
        let mut p = KineticParams::reference();
        p.k_plus = kp;
        p.k_minus = km;
        p.n0 = n as f64;
        p.with_max_length(p.min_length() + lmax)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_columns_sum_to_zero(p in small_system()) {
        let g = build_generator(&p).unwrap();
        for j in 0..g.dim() {
            prop_assert!(g.column_sum(j).abs() <= 1e-12 * (1.0 + g.max_exit_rate()));
        }
    }

    #[test]
    fn master_solution_stays_a_distribution(p in small_system(), t in 1e-4f64..0.5) {
        let g = build_generator(&p).unwrap();
        let p0 = ProbabilityVector::point_mass(&p).unwrap();
        let sol = MasterSolver::default().solve(&p0, &g, &[t]).unwrap();
        let total: f64 = sol[0].p.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(sol[0].p.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn trajectories_conserve_monomers(p in small_system(), seed in any::<u64>(), index in 0u64..1000) {
        let tr = simulate_trajectory(&p, 0.5, seed, index).unwrap();
        let total = p.n_total() + p.initial_length as u64;
        for e in &tr.events {
            prop_assert_eq!(e.state.n_free + e.state.length as u64, total);
            prop_assert!(e.state.length >= p.min_length() && e.state.length <= p.max_length());
        }
        prop_assert!(tr.events.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn trajectories_are_reproducible(seed in any::<u64>(), index in any::<u64>()) {
        let mut p = KineticParams::reference();
        p.n0 = 30.0;
        let a = simulate_trajectory(&p, 0.2, seed, index).unwrap();
        let b = simulate_trajectory(&p, 0.2, seed, index).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ode_conserves_total_monomer(n0 in 1.0f64..1000.0) {
        let mut p = KineticParams::reference();
        p.n0 = n0;
        for s in integrate_ode_strided(&p, 0.5, 1e-4, 50).unwrap() {
            prop_assert!((s.n + s.a - n0).abs() <= 1e-9 * n0);
            prop_assert!(s.n >= 0.0);
        }
    }

    #[test]
    fn eigenvalues_are_exact(n in 0.0f64..1e4, kp in 1e-3f64..10.0) {
        let mut p = KineticParams::reference();
        p.k_plus = kp;
        let e = eigenvalues(&jacobian(n, &p)).unwrap();
        let l2 = -4.0 * kp * n;
        prop_assert_eq!(e.lambda1, 0.0);
        prop_assert_eq!(e.lambda2, l2);
        // λ² + 4 k+ n λ = 0
        prop_assert!((e.lambda2 * e.lambda2 - 4.0 * kp * n * (-e.lambda2)).abs() <= 1e-12 * l2 * l2);
    }

    #[test]
    fn nullcline_points_are_fixed(a in 0.0f64..1000.0) {
        let p = KineticParams::reference();
        let n = nullcline(a, &p).unwrap();
        let (dn, da) = phase_rhs(PhasePoint::new(n, a), &p, PhaseForm::Coupled);
        prop_assert!(dn.abs() < 1e-12);
        prop_assert_eq!(da, -dn);
    }

    #[test]
    fn arrows_conserve_mass(n in 0.0f64..1000.0, a in 0.0f64..1000.0) {
        let p = KineticParams::reference();
        for form in [PhaseForm::Coupled, PhaseForm::Uncoupled] {
            let (dn, da) = phase_rhs(PhasePoint::new(n, a), &p, form);
            prop_assert_eq!(dn + da, 0.0);
        }
    }

    #[test]
    fn stability_index_is_monotone(m in 0.1f64..100.0, e in 0.1f64..10.0, l in 1e-7f64..1e-4, f in 1.01f64..5.0) {
        let base = stability_index(&StabilityInputs { m_field: m, enzyme: e, length: l }).unwrap();
        let score = |m_field, enzyme, length| stability_index(&StabilityInputs { m_field, enzyme, length }).unwrap();
        prop_assert!(score(m * f, e, l) > base);
        prop_assert!(score(m, e * f, l) > base);
        prop_assert!(score(m, e, l * f) < base);
    }

    #[test]
    fn drift_sign_follows_rate_balance(kp in 0.01f64..2.0, km in 0.0f64..3000.0) {
        let mut p = KineticParams::reference();
        p.k_plus = kp;
        p.k_minus = km;
        let c = fp_coefficients(&p).unwrap();
        prop_assert!(c.diffusion > 0.0);
        let net = kp * p.n0 - km;
        prop_assert_eq!(c.drift > 0.0, net > 0.0);
        prop_assert_eq!(c.drift < 0.0, net < 0.0);
    }

    #[test]
    fn transform_inverts_polynomials(
        coeffs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 1..4), 1..4),
        x0 in -2.0f64..2.0, y0 in -2.0f64..2.0, x in -2.0f64..2.0, y in -2.0f64..2.0,
    ) {
        let f = Polynomial2::new(coeffs);
        let t = dtm_transform(&f, (3, 3), (x0, y0)).unwrap();
        let want = f.eval(x, y);
        prop_assert!((dtm_inverse(&t, x, y) - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn total_variation_is_a_bounded_metric(raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20)) {
        let sp: f64 = raw.iter().map(|r| r.0).sum::<f64>() + 1e-12;
        let sq: f64 = raw.iter().map(|r| r.1).sum::<f64>() + 1e-12;
        let p: Vec<f64> = raw.iter().map(|r| r.0 / sp).collect();
        let q: Vec<f64> = raw.iter().map(|r| r.1 / sq).collect();
        let d = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert_eq!(d, total_variation(&q, &p).unwrap());
    }
}
