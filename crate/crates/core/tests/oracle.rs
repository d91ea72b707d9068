use std::f64::consts::PI;

use num_complex::Complex64;
use wqed::oracle::*;
use wqed::*;

fn matched(n_modes: usize, alpha: f64) -> (ModeSet, f64) {
    let cfg = WaveguideConfig::with_cutoff(1001, 1.0, 1.0, alpha).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let idx = select_oracle_modes(&modes, n_modes, 0.2).unwrap();
    (modes.subset(&idx), cfg.dx())
}

#[test]
fn variational_energy_bounds_exact_energy() {
    for alpha in [0.1, 0.4] {
        let (sub, dx) = matched(7, alpha);
        let pol = solve_two(0.2, dx, &sub, &SolverOptions::default()).unwrap();
        assert!(pol.converged);
        let model = OracleModel::build(&sub, 0.2, 2, dx, 2).unwrap();
        assert_eq!(model.dim(), 4 * 28);
        let gs = exact_ground(&model).unwrap();
        assert!(gs.energy <= pol.e_gs + 1e-10, "alpha {alpha}: {} > {}", gs.energy, pol.e_gs);
        let rho = &gs.reduced_density_matrix;
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((rho - rho.adjoint()).norm() < 1e-12);
    }
}

#[test]
fn single_emitter_bound() {
    let (sub, _) = matched(9, 0.2);
    let pol = solve_single(0.2, &sub, &SolverOptions::default()).unwrap();
    let model = OracleModel::build(&sub, 0.2, 1, 0.0, 3).unwrap();
    let gs = exact_ground(&model).unwrap();
    assert!(gs.energy <= pol.e_gs + 1e-10);
    assert_eq!(gs.parity, -1);
}

#[test]
fn propagation_preserves_norm() {
    let (sub, dx) = matched(7, 0.2);
    let pol = solve_two(0.2, dx, &sub, &SolverOptions::default()).unwrap();
    let model = OracleModel::build(&sub, 0.2, 2, dx, 2).unwrap();
    let active: Vec<f64> = pol.f.iter().zip(&sub.g).filter(|(_, &g)| g != 0.0).map(|(&f, _)| f).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = model
        .polaron_initial_state(&active, &[Complex64::new(h, 0.0), Complex64::new(h, 0.0)], pol.theta)
        .unwrap();
    assert!((psi.norm_squared() - 1.0).abs() < 1e-12);
    let tr = exact_evolve(&model, &psi, 1.0, 200.0).unwrap();
    assert!(tr.max_norm_error < 1e-10);
}

fn golden_rule_run(n_ph_max: usize) -> (Vec<f64>, Vec<f64>, bool) {
    let alpha = 0.005;
    let cfg = WaveguideConfig::new(4001, 200.0, 1.0, alpha).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let sub = modes.subset(&select_oracle_modes(&modes, 9, 1.0).unwrap());
    let model = OracleModel::build(&sub, 1.0, 1, 0.0, n_ph_max).unwrap();
    let f = vec![0.0; model.k.len()];
    let psi = model.polaron_initial_state(&f, &[Complex64::new(1.0, 0.0)], 0.0).unwrap();
    let t_end = 1.0 / (PI * alpha);
    let tr = exact_evolve(&model, &psi, t_end / 200.0, t_end).unwrap();
    let sz = tr.sigma_z.iter().map(|s| s[0]).collect();
    (tr.t, sz, tr.trusted)
}

#[test]
fn golden_rule_and_truncation_convergence() {
    let (t, sz2, trusted) = golden_rule_run(2);
    assert!(trusted);
    // Least-squares slope of ln P_e over one golden-rule lifetime.
    let y: Vec<f64> = sz2.iter().map(|s| ((1.0 + s) / 2.0).ln()).collect();
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    let rate = -sxy / sxx;
    let expected = PI * 0.005;
    assert!((rate - expected).abs() < 0.2 * expected, "rate {rate} vs {expected}");

    let (_, sz3, _) = golden_rule_run(3);
    let worst = sz2.iter().zip(&sz3).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn initial_state_matches_first_order_dressing() {
    // For small f the dressed state is |e,0> + sum_k (f e^{-ikx}) |g,1_k> + O(f^2).
    let cfg = WaveguideConfig::with_cutoff(101, 1.0, 1.0, 1e-6).unwrap();
    let modes = build_modes(&cfg).unwrap();
    let sub = modes.subset(&select_oracle_modes(&modes, 5, 0.2).unwrap());
    let model = OracleModel::build(&sub, 0.2, 1, 0.0, 2).unwrap();
    let f: Vec<f64> = (0..model.k.len()).map(|i| 1e-4 * (i as f64 + 1.0)).collect();
    let psi = model.polaron_initial_state(&f, &[Complex64::new(1.0, 0.0)], 0.0).unwrap();
    let n_fock = model.n_fock();
    for (kk, occ) in model.fock.iter().enumerate() {
        let photons: u8 = occ.iter().sum();
        if photons != 1 {
            continue;
        }
        let mode = occ.iter().position(|&n| n == 1).unwrap();
        let expected = -f[mode] * Complex64::from_polar(1.0, -model.k[mode] * model.positions[0]);
        // σx flips the emitter: the one-photon component sits in the ground manifold.
        let got = psi[kk];
        assert!((got - expected).norm() < 1e-7, "mode {mode}: {got} vs {expected}");
        assert!(psi[n_fock + kk].norm() < 1e-12);
    }
}
