use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;
use wqed::polaron::*;
use wqed::quadrature::Composite;
use wqed::{build_modes, WaveguideConfig};

fn ring(alpha: f64) -> wqed::ModeSet {
    build_modes(&WaveguideConfig::with_cutoff(1001, 1.0, 1.0, alpha).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Reference values from an independent numpy implementation of the same
// fixed-point equations (plain half-step mixing, 1e-15 stopping rule).
#[test]
fn single_emitter_reference_values() {
    let cases = [
        (0.05, 1.797957477974301e-01, -1.640192589103003e-01),
        (0.1, 1.598159444268224e-01, -2.291092033929379e-01),
        (0.2, 1.209969677871961e-01, -3.626639175347042e-01),
    ];
    for (alpha, dr, e) in cases {
        let modes = ring(alpha);
        let sol = solve_single(0.2, &modes, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(rel(sol.delta_r, dr) < 1e-8, "alpha {alpha}: {}", sol.delta_r);
        assert!(rel(sol.e_gs, e) < 1e-8, "alpha {alpha}: {}", sol.e_gs);
        assert!(fixed_point_residuals(&sol, &modes).max() < 1e-8);
    }
}

#[test]
fn two_emitter_reference_values() {
    let cases = [
        (0.05, 0.5, 1.753854120544164e-01, 9.495265590829974e-02, -3.511579850188917e-01),
        (0.1, 2.5, 1.582014612721182e-01, 3.165320841906259e-02, -4.611606340646220e-01),
        (0.1, 8.0, 1.598370644362404e-01, -5.219944953221825e-03, -4.582996931783445e-01),
        (0.2, 0.3, 6.194433772299045e-02, 5.383620941642926e-01, -1.169249361933546e+00),
    ];
    for (alpha, x_cells, dr, j, e) in cases {
        let modes = ring(alpha);
        let x = x_cells * modes.config().dx();
        let sol = solve_two(0.2, x, &modes, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(rel(sol.delta_r, dr) < 1e-8, "alpha {alpha} x {x_cells}: dr {}", sol.delta_r);
        assert!(rel(sol.ising_j, j) < 1e-7, "alpha {alpha} x {x_cells}: J {}", sol.ising_j);
        assert!(rel(sol.e_gs, e) < 1e-8, "alpha {alpha} x {x_cells}: e {}", sol.e_gs);
        assert!(fixed_point_residuals(&sol, &modes).max() < 1e-8);
        assert!((sol.cal_e - sol.tilde_delta_r()).abs() < 1e-12);
    }
}

#[test]
fn far_emitters_decouple() {
    let modes = ring(0.1);
    let single = solve_single(0.2, &modes, &SolverOptions::default()).unwrap();
    // Half the ring: the farthest two points can be apart.
    let x = 500.5 * modes.config().dx();
    let two = solve_two(0.2, x, &modes, &SolverOptions::default()).unwrap();
    assert!(two.ising_j.abs() < 1e-2 * two.delta_r);
    assert!(rel(two.delta_r, single.delta_r) < 1e-2);
}

#[test]
fn corrected_ising_matches_quadrature() {
    let q = Composite::new(24, 400);
    for (alpha, wc, dr) in [(0.1, 5.0, 0.4), (0.3, 1.0, 0.05), (0.05, 8.0, 1.3)] {
        for x in [0.0, 0.05, 0.4, 1.0, 3.7, 20.0] {
            let exact = alpha
                * q.integrate(0.0, wc, |w| (1.0 - dr * dr / ((dr + w) * (dr + w))) * (w * x).cos());
            let closed = ising_corrected(alpha, wc, x, 1.0, dr);
            assert!((closed - exact).abs() < 1e-11 * alpha * wc, "x {x}: {closed} vs {exact}");
        }
    }
}

#[test]
fn corrected_ising_recovers_sinc_for_strong_renormalization() {
    let (alpha, wc) = (0.4, 10.0);
    for x in [0.01, 0.2, 1.0] {
        let a = ising_corrected(alpha, wc, x, 1.0, 1e-9);
        let b = ising_sinc(alpha, wc, x, 1.0);
        assert!((a - b).abs() < 1e-6 * alpha * wc);
    }
}

#[test]
fn phases_vanish_on_symmetric_sums() {
    let modes = ring(0.1);
    let sol = solve_two(0.2, 3.3 * modes.config().dx(), &modes, &SolverOptions::default()).unwrap();
    let ph = auxiliary_phases(&sol, &modes);
    assert!(ph.phi_x.abs() < 1e-13);
    let half = auxiliary_phases_positive_k(&sol, &modes);
    assert!(half.phi_x.abs() > 1e-4);
    assert!((2.0 * half.zeta_x - ph.zeta_x).abs() < 1e-12);
}

fn solution(r: f64, theta: f64) -> PolaronSolution {
    PolaronSolution {
        f: vec![],
        delta_r: r,
        ising_j: 0.0,
        cal_e: r,
        theta,
        e_gs: 0.0,
        x_sep: Some(1.0),
        bare_delta: 1.0,
        converged: true,
        localized: r == 0.0,
        iterations: 0,
        modes_fingerprint: 0,
    }
}

proptest! {
    #[test]
    fn entropy_is_one_minus_purity(
        r in 0.0f64..1.0,
        theta in -0.78f64..0.78,
        zeta in 0.0f64..0.8,
        phi in -0.5f64..0.5,
    ) {
        let sol = solution(r, theta);
        let ph = AuxiliaryPhases { phi_x: phi, zeta_x: zeta };
        let rho = reduced_density_matrix(&sol, &ph);
        let purity = (rho * rho).trace();
        prop_assert!((linear_entropy(&sol, &ph) - (1.0 - purity.re)).abs() < 1e-12);
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((rho - rho.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn entropy_bounds_and_far_limit(r in 0.0f64..1.0, theta in -0.78f64..0.78) {
        let sol = solution(r, theta);
        let ph = AuxiliaryPhases { phi_x: 0.0, zeta_x: 0.0 };
        let s = linear_entropy(&sol, &ph);
        prop_assert!((-1e-12..=0.75 + 1e-12).contains(&s));
        let far = solution(r, 0.0);
        prop_assert!((linear_entropy(&far, &ph) - linear_entropy_infinite_distance(r)).abs() < 1e-12);
    }

    #[test]
    fn magnetization_bounded(r in 0.0f64..1.0, theta in -0.78f64..0.78, phi in -3.0f64..3.0) {
        let sol = solution(r, theta);
        let m = gs_magnetization(&sol, &AuxiliaryPhases { phi_x: phi, zeta_x: 0.0 });
        prop_assert!(m.abs() <= r + 1e-15);
    }
}

#[test]
fn density_matrix_is_positive_at_solver_output() {
    for alpha in [0.05, 0.2] {
        let modes = ring(alpha);
        let sol = solve_two(0.2, 0.7 * modes.config().dx(), &modes, &SolverOptions::default()).unwrap();
        let rho = reduced_density_matrix(&sol, &auxiliary_phases(&sol, &modes));
        let eig = SymmetricEigen::new(rho);
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12), "{:?}", eig.eigenvalues);
    }
}
