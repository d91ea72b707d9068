use num_complex::Complex64;
use proptest::prelude::*;
use wqed::dde::*;
use wqed::dynamics::*;
use wqed::polaron::*;
use wqed::{build_modes, WaveguideConfig};

fn ring(n: usize, alpha: f64) -> wqed::ModeSet {
    build_modes(&WaveguideConfig::with_cutoff(n, 1.0, 1.0, alpha).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn converged_solutions_satisfy_their_equations(
        alpha in 0.01f64..0.4,
        ratio in 0.05f64..0.5,
        cells in 0.0f64..20.0,
    ) {
        let modes = ring(201, alpha);
        let x = cells * modes.config().dx();
        let sol = solve_two(ratio, x, &modes, &SolverOptions::default()).unwrap();
        prop_assume!(sol.converged);
        prop_assert!(fixed_point_residuals(&sol, &modes).max() < 1e-9);
        prop_assert!(sol.theta.cos() >= 0.0);
        if sol.ising_j != 0.0 {
            prop_assert_eq!(sol.theta.sin().signum(), sol.ising_j.signum());
        }
        let s = linear_entropy(&sol, &auxiliary_phases(&sol, &modes));
        prop_assert!((-1e-12..=0.75 + 1e-12).contains(&s));
        let far = linear_entropy_infinite_distance(sol.renormalization());
        prop_assert!((0.0..=0.75).contains(&far));
    }

    #[test]
    fn delta_r_non_increasing_in_alpha(ratio in 0.05f64..0.5, cells in 0.0f64..20.0) {
        let mut last = f64::INFINITY;
        for i in 0..12 {
            let alpha = 0.05 * i as f64;
            let modes = ring(201, alpha);
            let sol = solve_two(ratio, cells * modes.config().dx(), &modes, &SolverOptions::default()).unwrap();
            prop_assert!(sol.delta_r <= last * (1.0 + 1e-9), "alpha {}: {} > {}", alpha, sol.delta_r, last);
            last = sol.delta_r;
        }
    }

    #[test]
    fn corrected_ising_closed_form_matches_quadrature(
        alpha in 0.01f64..0.5,
        wc in 0.5f64..10.0,
        dr_frac in 0.0f64..1.0,
        x in 0.0f64..10.0,
    ) {
        let dr = dr_frac * wc;
        let q = wqed::quadrature::Composite::new(24, 600);
        let exact = alpha * q.integrate(0.0, wc, |w| (1.0 - dr * dr / ((dr + w) * (dr + w))) * (w * x).cos());
        prop_assert!((ising_corrected(alpha, wc, x, 1.0, dr) - exact).abs() < 1e-10 * alpha * wc);
    }

    #[test]
    fn dde_gate_is_exact_and_population_bounded(
        gamma in 0.0f64..0.5,
        tau in 0.5f64..5.0,
        phase in 0.0f64..6.3,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        p in 0.0f64..6.3,
    ) {
        let norm = (a * a + b * b).sqrt().max(1e-3);
        let c0 = [Complex64::new(a / norm, 0.0), Complex64::from_polar(b / norm, p)];
        let sys = DdeSystem { gamma, ising_j: 0.0, tilde_delta_r: 1.0, delta_r: 1.0, tau, phase };
        let tr = solve_dde(&sys, c0, tau / 20.0, 6.0 * tau).unwrap();
        for (t, c) in tr.t.iter().zip(&tr.c) {
            if *t > tau {
                break;
            }
            prop_assert_eq!(*c, delay_free_flow(&sys, c0, *t));
        }
        // Reabsorption can raise the emitter population after τ, but never
        // above its initial value; before τ the decay is monotone.
        for i in 1..tr.t.len() {
            prop_assert!(tr.norm(i) <= tr.norm(0) + 1e-9, "t = {}", tr.t[i]);
            if tr.t[i] <= tau {
                prop_assert!(tr.norm(i) <= tr.norm(i - 1) + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dynamics_conserves_norm_and_reverses(
        alpha in 0.0f64..0.6,
        cells in 1.0f64..30.0,
        a in -1.0f64..1.0,
        phase in 0.0f64..6.3,
    ) {
        let cfg = WaveguideConfig::new(201, 20.0 * std::f64::consts::PI, 1.0, alpha).unwrap();
        let modes = build_modes(&cfg).unwrap();
        let o = SolverOptions::default();
        let single = solve_single(1.0, &modes, &o).unwrap();
        let two = solve_two(1.0, cells * cfg.dx(), &modes, &o).unwrap();
        let sys = build_effective(&two, &single, &modes, 0.0).unwrap();
        let b = (1.0 - a * a).sqrt();
        let mut init = ExcitationState::new(Complex64::new(a, 0.0), Complex64::from_polar(b, phase), modes.len());
        init.t = 0.0;
        let dt = 0.05 / sys.omega_max();
        let t_end = 0.5 * sys.recurrence_time();
        let fwd = evolve(&sys, &init, dt, t_end, 100).unwrap();
        prop_assert!(fwd.max_norm_drift < 1e-6);
        let back = evolve(&sys, &fwd.final_state, -dt, 0.0, 100).unwrap();
        prop_assert!((back.final_state.c1 - init.c1).norm() < 1e-8);
        prop_assert!((back.final_state.c2 - init.c2).norm() < 1e-8);
    }
}
