use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use wqed::dde::*;
use wqed::dynamics::*;
use wqed::polaron::PolaronSolution;
use wqed::*;

struct Setup {
    modes: ModeSet,
    single: PolaronSolution,
    two: PolaronSolution,
    sys: EffectiveSystem,
}

/// Ring of length 40π with 1001 cells, unit group velocity and Δ = 1.
fn setup(alpha: f64, x: f64) -> Setup {
    let cfg = WaveguideConfig::new(1001, 40.0 * PI, 1.0, alpha).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let o = SolverOptions::default();
    let single = solve_single(1.0, &modes, &o).unwrap();
    let two = solve_two(1.0, x, &modes, &o).unwrap();
    let sys = build_effective(&two, &single, &modes, 0.0).unwrap();
    Setup { modes, single, two, sys }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn effective_coupling_spot_check() {
    let cfg = WaveguideConfig::with_cutoff(1001, 5.0, 1.0, 0.1).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let o = SolverOptions::default();
    let single = solve_single(1.0, &modes, &o).unwrap();
    let two = solve_two(1.0, 2.0 * PI, &modes, &o).unwrap();
    let sys = build_effective(&two, &single, &modes, 0.0).unwrap();
    let wc = cfg.omega_c();
    let dx = cfg.dx();
    for m in [1i64, -37, 250] {
        let i = modes.index_of(m).unwrap();
        let k = 2.0 * PI * m as f64 / cfg.length;
        let w = wc * (2.0 - 2.0 * (k * dx).cos()).sqrt();
        let g = (PI * 0.1 * w / (2.0 * cfg.length)).sqrt();
        let expected = 2.0 * two.delta_r * g / (w + single.delta_r);
        assert!((sys.g_eff[i] - expected).abs() < 1e-12 * expected, "m = {m}");
    }
    assert!(sys.g_eff.iter().all(|&g| g >= 0.0));
    assert!((sys.x2 - sys.x1 - 2.0 * PI).abs() < 1e-12);
    assert!((sys.x1 + sys.x2 - cfg.length).abs() < 1e-12);
}

#[test]
fn epsilon_enters_linearly() {
    let s = setup(0.1, 2.0 * PI);
    let eps = build_effective(&s.two, &s.single, &s.modes, 0.01).unwrap();
    for i in [0, 300, 700] {
        let diff = eps.g_eff[i] - s.sys.g_eff[i];
        assert!((diff - 0.01 * (s.two.delta_r - s.modes.omega[i])).abs() < 1e-15);
    }
}

#[test]
fn time_reversal_returns_to_start() {
    let s = setup(0.1, 2.0 * PI);
    let dt = 0.05 / s.sys.omega_max();
    let init = ExcitationState::prepare(InitialState::Symmetric, s.modes.len());
    let fwd = evolve(&s.sys, &init, dt, 20.0, 1000).unwrap();
    let back = evolve(&s.sys, &fwd.final_state, -dt, 0.0, 1000).unwrap();
    let end = &back.final_state;
    assert!(end.t.abs() < 1e-9);
    assert!((end.c1 - init.c1).norm() < 1e-8);
    assert!((end.c2 - init.c2).norm() < 1e-8);
    let worst = end.psi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "photon residue {worst}");
}

#[test]
fn polaron_sigma_z_sum_identity() {
    let s = setup(0.5, 2.0 * PI);
    let dt = 0.05 / s.sys.omega_max();
    let init = ExcitationState::prepare(InitialState::ExcitedGround, s.modes.len());
    let tr = evolve(&s.sys, &init, dt, 10.0, 200).unwrap();
    let c2t = (2.0 * s.sys.theta).cos();
    for smp in &tr.samples {
        let lhs = smp.sz_pol[0] + smp.sz_pol[1];
        let rhs = c2t * (2.0 * smp.c1.norm_sqr() + 2.0 * smp.c2.norm_sqr() - 2.0);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

#[test]
fn lab_frame_limits() {
    let s = setup(0.0, 2.0 * PI);
    let mut st = ExcitationState::prepare(InitialState::Symmetric, s.modes.len());
    st.psi[10] = Complex64::new(0.1, 0.2);
    assert_eq!(lab_sigma_z(&st, &s.sys), polaron_sigma_z(&st, s.sys.theta));

    let s = setup(0.3, 2.0 * PI);
    let st = ExcitationState::prepare(InitialState::ExcitedGround, s.modes.len());
    let r = s.two.delta_r;
    let (l1, l2) = lab_sigma_z(&st, &s.sys);
    let (p1, p2) = polaron_sigma_z(&st, s.sys.theta);
    assert!((l1 - r * p1).abs() < 1e-15 && (l2 - r * p2).abs() < 1e-15);
}

// The dressing terms of the lab transform are first order in α.
#[test]
fn weak_coupling_frame_difference_scales_with_alpha() {
    let mut worst_by_alpha = vec![];
    for alpha in [0.0025, 0.005, 0.01] {
        let s = setup(alpha, 2.0 * PI);
        let dt = 0.05 / s.sys.omega_max();
        let ratio = s.two.delta_r / s.two.bare_delta;
        let mut worst: f64 = 0.0;
        for kind in [InitialState::Symmetric, InitialState::Antisymmetric] {
            let init = ExcitationState::prepare(kind, s.modes.len());
            let tr = evolve(&s.sys, &init, dt, 30.0, 50).unwrap();
            for x in &tr.samples {
                for i in 0..2 {
                    worst = worst.max((x.sz_lab[i] - ratio * x.sz_pol[i]).abs());
                }
            }
        }
        assert!(worst <= 1.5 * alpha, "alpha {alpha}: {worst}");
        worst_by_alpha.push(worst);
    }
    let slope = worst_by_alpha[2] / worst_by_alpha[1];
    assert!((1.6..2.4).contains(&slope), "{worst_by_alpha:?}");
}

#[test]
fn delay_model_tracks_full_dynamics_at_weak_coupling() {
    let s = setup(0.01, 2.0 * PI);
    let dde = build_dde(&s.two, &s.modes).unwrap();
    let dt = 0.05 / s.sys.omega_max();
    let h = FRAC_1_SQRT_2;
    for (kind, c0) in [
        (InitialState::Symmetric, [c(h), c(h)]),
        (InitialState::Antisymmetric, [c(h), c(-h)]),
    ] {
        let tr = evolve(&s.sys, &ExcitationState::prepare(kind, s.modes.len()), dt, 100.0, 100).unwrap();
        let d = solve_dde(&dde, c0, 0.01, 100.0).unwrap();
        let mut worst: f64 = 0.0;
        for smp in &tr.samples {
            let i = (smp.t / d.h).round() as usize;
            if (d.t[i] - smp.t).abs() < 0.5 * dt {
                worst = worst.max((smp.c1.norm() - d.c[i][0].norm()).abs());
                worst = worst.max((smp.c2.norm() - d.c[i][1].norm()).abs());
            }
        }
        assert!(worst <= 0.02, "{kind:?}: {worst}");
    }
}

#[test]
fn weak_coupling_rate_matches_golden_rule() {
    let s = setup(0.01, 2.0 * PI);
    let dde = build_dde(&s.two, &s.modes).unwrap();
    let gr = golden_rule_rate(0.01, s.two.delta_r);
    assert!((dde.gamma - gr).abs() < 1e-3 * gr);
    // Plateau of γ(t) before the delayed feedback arrives.
    let dt = 0.05 / s.sys.omega_max();
    let init = ExcitationState::prepare(InitialState::Symmetric, s.modes.len());
    let tr = evolve(&s.sys, &init, dt, dde.tau, 10).unwrap();
    // Skip the initial transient and the precursor of the finite-width coupling.
    let window: Vec<f64> =
        tr.samples.iter().filter(|x| x.t > 2.0 && x.t < dde.tau - 2.0).filter_map(|x| x.gamma[0]).collect();
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    assert!((mean - dde.gamma).abs() < 0.1 * dde.gamma, "plateau {mean} vs {}", dde.gamma);
}

#[test]
fn bound_state_at_exact_resonance() {
    // Place the emitters so that the delay phase is exactly 2π.
    let probe = setup(0.01, 2.0 * PI);
    let x = 2.0 * PI / probe.two.tilde_delta_r();
    let s = setup(0.01, x);
    let dde = build_dde(&s.two, &s.modes).unwrap();
    let h = FRAC_1_SQRT_2;
    let d = solve_dde(&dde, [c(h), c(-h)], 0.01, 110.0).unwrap();
    let closed = bic_amplitude(dde.gamma, dde.tau).powi(2);
    let tail = d.c.last().unwrap()[0].norm_sqr();
    assert!((tail - closed).abs() < 1e-3, "{tail} vs {closed}");
    let sym = solve_dde(&dde, [c(h), c(h)], 0.01, 110.0).unwrap();
    assert!(sym.c.last().unwrap()[0].norm_sqr() < 1e-3);
    let tol = SteadyStateTolerance { phase: 1e-3, ising: 5e-3 };
    let st = steady_state(&dde, Parity::Antisymmetric, tol).unwrap();
    assert!((st.amplitude.powi(2) - closed).abs() < 1e-15);
}

#[test]
fn lamb_shift_methods_agree() {
    let cfg = WaveguideConfig::with_cutoff(1001, 5.0, 1.0, 0.01).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let o = SolverOptions::default();
    let two = solve_two(1.0, 2.0 * PI, &modes, &o).unwrap();
    let mut values = vec![];
    for quad in [wqed::quadrature::Composite::new(16, 32), wqed::quadrature::Composite::new(24, 96)] {
        for method in [PrincipalValueMethod::SymmetricWindow, PrincipalValueMethod::GlobalSubtraction] {
            values.push(lamb_shift_with(&two, &modes, method, &quad).unwrap());
        }
    }
    for v in &values {
        assert!((v - values[0]).abs() < 1e-8, "{values:?}");
    }
    // Regression value; small compared with the renormalized splitting.
    let dl = lamb_shift(&two, &modes).unwrap();
    assert!(dl.abs() < 0.05 * two.delta_r, "{dl}");
    assert!((dl - LAMB_REFERENCE).abs() < 1e-9, "{dl}");

    let free = build_modes(&WaveguideConfig::with_cutoff(1001, 5.0, 1.0, 0.0).unwrap()).unwrap();
    let two0 = solve_two(1.0, 2.0 * PI, &free, &o).unwrap();
    assert_eq!(lamb_shift(&two0, &free).unwrap(), 0.0);
}

// 30-digit mpmath principal value evaluated with this run's Δ_r and Δ̃_r.
const LAMB_REFERENCE: f64 = -6.247_173_612_701_796e-3;
