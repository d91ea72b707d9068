//! Single-excitation dynamics of two emitters in the polaron frame.
//!
//! The state is `c_1 |eg> + c_2 |ge> + sum_k psi_k |gg, 1_k>` in the polaron
//! frame. The amplitude equations are linear and excitation preserving:
//!
//! ```text
//! i dc_i/dt   = -J c_j + cosθ sum_k G_k e^{-ik x_i} psi_k
//! i dpsi_k/dt = (ω_k - Δ̃_r) psi_k + G_k cosθ sum_j e^{ik x_j} c_j
//!               + 2 Δ_r cos2θ f_k sum_j e^{ik x_j} sum_k' f_k' e^{-ik' x_j} psi_k'
//! ```
//!
//! The scattering term is evaluated through the per-emitter projections
//! `sum_k' f_k' e^{-ik' x_j} psi_k'`, so one right-hand side costs O(N).

use num_complex::Complex64;
use thiserror::Error;

use crate::polaron::PolaronSolution;
use crate::waveguide::ModeSet;

/// Total-norm drift that aborts an integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Largest allowed `|dt| * omega_max`.
pub const MAX_STEP_FRACTION: f64 = 0.1;
/// Amplitudes below this give no decay-rate sample.
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("solutions were computed on a different mode set")]
    MismatchedModes,
    #[error("the {0} solution did not converge")]
    NotConverged(&'static str),
    #[error("expected a {0} solution")]
    WrongKind(&'static str),
    #[error("time step {dt} exceeds {limit} = 0.1 / omega_max")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("time step must be non-zero and finite")]
    BadStep,
    #[error("end time {t_end} reaches the recurrence time {limit}")]
    BeyondRecurrence { t_end: f64, limit: f64 },
    #[error("end time {t_end} lies behind the start time {t_start} for this step sign")]
    BadInterval { t_start: f64, t_end: f64 },
    #[error("output stride must be positive")]
    BadStride,
    #[error("initial state has {got} photon amplitudes, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("initial state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("norm drift {drift:.3e} at t = {t}")]
    NormDrift { t: f64, drift: f64 },
    #[error("non-finite amplitude at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone)]
pub struct EffectiveSystem {
    /// Emitter-photon coupling `G_k`.
    pub g_eff: Vec<f64>,
    pub tilde_delta_r: f64,
    pub theta: f64,
    pub delta_r: f64,
    pub bare_delta: f64,
    pub ising_j: f64,
    /// Two-emitter displacements.
    pub f: Vec<f64>,
    pub x1: f64,
    pub x2: f64,
    pub epsilon: f64,
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub v_g: f64,
    pub length: f64,
    /// `e^{-ik x_1}` and `e^{-ik x_2}`.
    phase1: Vec<Complex64>,
    phase2: Vec<Complex64>,
}

/// Couples a converged two-emitter solution to the photon continuum.
///
/// `sol_single` supplies `f_k^{(0)}` for `G_k = 2 Δ_r f_k^{(0)} + ε (Δ_r - ω_k)`.
pub fn build_effective(
    sol: &PolaronSolution,
    sol_single: &PolaronSolution,
    modes: &ModeSet,
    epsilon: f64,
) -> Result<EffectiveSystem, DynamicsError> {
    let fp = modes.fingerprint();
    if sol.modes_fingerprint != fp || sol_single.modes_fingerprint != fp {
        return Err(DynamicsError::MismatchedModes);
    }
    let x = sol.x_sep.ok_or(DynamicsError::WrongKind("two-emitter"))?;
    if sol_single.x_sep.is_some() {
        return Err(DynamicsError::WrongKind("single-emitter"));
    }
    if !sol.converged {
        return Err(DynamicsError::NotConverged("two-emitter"));
    }
    if !sol_single.converged {
        return Err(DynamicsError::NotConverged("single-emitter"));
    }
    let cfg = modes.config();
    let g_eff = sol_single
        .f
        .iter()
        .zip(&modes.omega)
        .map(|(&f0, &w)| 2.0 * sol.delta_r * f0 + epsilon * (sol.delta_r - w))
        .collect();
    let x1 = 0.5 * cfg.length - 0.5 * x;
    let x2 = 0.5 * cfg.length + 0.5 * x;
    let phase = |xi: f64| modes.k.iter().map(|&k| Complex64::from_polar(1.0, -k * xi)).collect();
    Ok(EffectiveSystem {
        g_eff,
        tilde_delta_r: sol.tilde_delta_r(),
        theta: sol.theta,
        delta_r: sol.delta_r,
        bare_delta: sol.bare_delta,
        ising_j: sol.ising_j,
        f: sol.f.clone(),
        x1,
        x2,
        epsilon,
        k: modes.k.clone(),
        omega: modes.omega.clone(),
        v_g: cfg.v_g,
        length: cfg.length,
        phase1: phase(x1),
        phase2: phase(x2),
    })
}

impl EffectiveSystem {
    pub fn n_modes(&self) -> usize {
        self.k.len()
    }

    pub fn separation(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn omega_max(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }

    /// Time for a photon to travel between the emitters.
    pub fn feedback_time(&self) -> f64 {
        self.separation() / self.v_g
    }

    /// First time a photon emitted by one emitter returns around the ring.
    pub fn recurrence_time(&self) -> f64 {
        (self.length - self.separation()) / self.v_g
    }

    /// `sum_k w_k e^{-ik x_i} psi_k` for emitter `i`.
    fn project(&self, emitter: usize, weights: &[f64], psi: &[Complex64]) -> Complex64 {
        let ph = if emitter == 0 { &self.phase1 } else { &self.phase2 };
        weights
            .iter()
            .zip(ph)
            .zip(psi)
            .fold(Complex64::new(0.0, 0.0), |acc, ((&w, &p), &s)| acc + w * p * s)
    }

    /// Writes the time derivative of `(c1, c2, psi)` into `out`.
    fn rhs(&self, c: [Complex64; 2], psi: &[Complex64], out_c: &mut [Complex64; 2], out_psi: &mut [Complex64]) {
        let (cos_t, cos_2t) = (self.theta.cos(), (2.0 * self.theta).cos());
        let a1 = self.project(0, &self.g_eff, psi);
        let a2 = self.project(1, &self.g_eff, psi);
        let s1 = self.project(0, &self.f, psi);
        let s2 = self.project(1, &self.f, psi);
        out_c[0] = -I * (-self.ising_j * c[1] + cos_t * a1);
        out_c[1] = -I * (-self.ising_j * c[0] + cos_t * a2);
        let scatter = 2.0 * self.delta_r * cos_2t;
        for k in 0..psi.len() {
            let (e1, e2) = (self.phase1[k].conj(), self.phase2[k].conj());
            let emit = self.g_eff[k] * cos_t * (e1 * c[0] + e2 * c[1]);
            let scat = scatter * self.f[k] * (e1 * s1 + e2 * s2);
            out_psi[k] = -I * ((self.omega[k] - self.tilde_delta_r) * psi[k] + emit + scat);
        }
    }

    /// `dc_i/dt` evaluated from the equations of motion.
    pub fn emitter_derivative(&self, state: &ExcitationState) -> [Complex64; 2] {
        let cos_t = self.theta.cos();
        let a1 = self.project(0, &self.g_eff, &state.psi);
        let a2 = self.project(1, &self.g_eff, &state.psi);
        [
            -I * (-self.ising_j * state.c2 + cos_t * a1),
            -I * (-self.ising_j * state.c1 + cos_t * a2),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    pub t: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub psi: Vec<Complex64>,
}

/// Named initial states prepared in the polaron frame with an empty field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// `(c1, c2) = (1, 1)/sqrt 2`.
    Symmetric,
    /// `(c1, c2) = (1, -1)/sqrt 2`.
    Antisymmetric,
    /// Emitter 1 excited, emitter 2 in its ground state.
    ExcitedGround,
}

impl ExcitationState {
    pub fn new(c1: Complex64, c2: Complex64, n_modes: usize) -> Self {
        Self { t: 0.0, c1, c2, psi: vec![Complex64::new(0.0, 0.0); n_modes] }
    }

    pub fn prepare(kind: InitialState, n_modes: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match kind {
            InitialState::Symmetric => (h, h),
            InitialState::Antisymmetric => (h, -h),
            InitialState::ExcitedGround => (1.0, 0.0),
        };
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0), n_modes)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>()
    }

    fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite() && self.psi.iter().all(|p| p.is_finite())
    }
}

/// Polaron-frame magnetizations
/// `cos²θ (2|c_i|² - 1) - sin²θ (2|c_j|² - 1)`.
pub fn polaron_sigma_z(state: &ExcitationState, theta: f64) -> (f64, f64) {
    let (c2t, s2t) = (theta.cos().powi(2), theta.sin().powi(2));
    let p1 = 2.0 * state.c1.norm_sqr() - 1.0;
    let p2 = 2.0 * state.c2.norm_sqr() - 1.0;
    (c2t * p1 - s2t * p2, c2t * p2 - s2t * p1)
}

/// Lab-frame magnetizations including the photon-dressing terms.
///
/// Each emitter uses its own projection `P_i = sum_k f_k e^{-ik x_i} psi_k`.
pub fn lab_sigma_z(state: &ExcitationState, sys: &EffectiveSystem) -> (f64, f64) {
    let (pol1, pol2) = polaron_sigma_z(state, sys.theta);
    let p1 = sys.project(0, &sys.f, &state.psi);
    let p2 = sys.project(1, &sys.f, &state.psi);
    let (ct, st, c2t) = (sys.theta.cos(), sys.theta.sin(), (2.0 * sys.theta).cos());
    let lab = |pol: f64, own: Complex64, other: Complex64, p: Complex64| {
        pol + 4.0 * ct * (own * p.conj()).re - 4.0 * st * (other * p.conj()).re + 4.0 * c2t * p.norm_sqr()
    };
    let r = sys.delta_r / sys.bare_delta;
    (r * lab(pol1, state.c1, state.c2, p1), r * lab(pol2, state.c2, state.c1, p2))
}

/// Instantaneous decay rate `-2 Re(dc_i/dt / c_i)`, `None` below the floor.
pub fn instantaneous_decay_rate(sys: &EffectiveSystem, state: &ExcitationState) -> [Option<f64>; 2] {
    let d = sys.emitter_derivative(state);
    let rate = |c: Complex64, dc: Complex64| {
        if c.norm() < AMPLITUDE_FLOOR {
            None
        } else {
            Some(-2.0 * (dc / c).re)
        }
    };
    [rate(state.c1, d[0]), rate(state.c2, d[1])]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub sz_pol: [f64; 2],
    pub sz_lab: [f64; 2],
    pub gamma: [Option<f64>; 2],
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub stride: usize,
    pub samples: Vec<Sample>,
    /// Full state at the last integration step.
    pub final_state: ExcitationState,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

/// `gamma^{(i)}(t)` at the stored samples; `None` marks a gap.
pub fn decay_rate(traj: &Trajectory, emitter: usize) -> Vec<Option<f64>> {
    assert!(emitter < 2, "emitter index must be 0 or 1");
    traj.samples.iter().map(|s| s.gamma[emitter]).collect()
}

fn sample(sys: &EffectiveSystem, state: &ExcitationState) -> Sample {
    let (p1, p2) = polaron_sigma_z(state, sys.theta);
    let (l1, l2) = lab_sigma_z(state, sys);
    Sample {
        t: state.t,
        c1: state.c1,
        c2: state.c2,
        sz_pol: [p1, p2],
        sz_lab: [l1, l2],
        gamma: instantaneous_decay_rate(sys, state),
        norm: state.norm_sqr(),
    }
}

/// Fixed-step RK4 from `init.t` to `t_end`, sampling every `stride` steps.
///
/// A negative `dt` integrates backwards. The step count is
/// `round((t_end - init.t) / dt)`.
pub fn evolve(
    sys: &EffectiveSystem,
    init: &ExcitationState,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory, DynamicsError> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(DynamicsError::BadStep);
    }
    let limit = MAX_STEP_FRACTION / sys.omega_max();
    if dt.abs() > limit {
        return Err(DynamicsError::StepTooLarge { dt, limit });
    }
    if stride == 0 {
        return Err(DynamicsError::BadStride);
    }
    let rec = sys.recurrence_time();
    if t_end.abs() >= rec || init.t.abs() >= rec {
        return Err(DynamicsError::BeyondRecurrence { t_end, limit: rec });
    }
    let n = init.psi.len();
    if n != sys.n_modes() {
        return Err(DynamicsError::LengthMismatch { got: n, expected: sys.n_modes() });
    }
    let norm0 = init.norm_sqr();
    if (norm0 - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(DynamicsError::NotNormalized(norm0));
    }
    let steps_f = ((t_end - init.t) / dt).round();
    if steps_f < 0.0 {
        return Err(DynamicsError::BadInterval { t_start: init.t, t_end });
    }
    let steps = steps_f as usize;

    let mut state = init.clone();
    let t0 = init.t;
    let mut samples = vec![sample(sys, &state)];
    let mut max_drift: f64 = 0.0;

    let zero = Complex64::new(0.0, 0.0);
    let mut kc = [[zero; 2]; 4];
    let mut kp = vec![vec![zero; n]; 4];
    let mut tmp = vec![zero; n];
    for step in 1..=steps {
        let c = [state.c1, state.c2];
        sys.rhs(c, &state.psi, &mut kc[0], &mut kp[0]);
        for stage in 1..4 {
            let w = if stage == 3 { dt } else { 0.5 * dt };
            let cs = [c[0] + w * kc[stage - 1][0], c[1] + w * kc[stage - 1][1]];
            for k in 0..n {
                tmp[k] = state.psi[k] + w * kp[stage - 1][k];
            }
            sys.rhs(cs, &tmp, &mut kc[stage], &mut kp[stage]);
        }
        let sixth = dt / 6.0;
        state.c1 += sixth * (kc[0][0] + 2.0 * kc[1][0] + 2.0 * kc[2][0] + kc[3][0]);
        state.c2 += sixth * (kc[0][1] + 2.0 * kc[1][1] + 2.0 * kc[2][1] + kc[3][1]);
        for k in 0..n {
            state.psi[k] += sixth * (kp[0][k] + 2.0 * kp[1][k] + 2.0 * kp[2][k] + kp[3][k]);
        }
        state.t = t0 + step as f64 * dt;

        if !state.is_finite() {
            return Err(DynamicsError::NonFinite { t: state.t });
        }
        let drift = (state.norm_sqr() - norm0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(DynamicsError::NormDrift { t: state.t, drift });
        }
        if step % stride == 0 {
            samples.push(sample(sys, &state));
        }
    }
    Ok(Trajectory { dt, stride, samples, final_state: state, max_norm_drift: max_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polaron::{solve_single, solve_two, SolverOptions};
    use crate::waveguide::{build_modes, WaveguideConfig};

    fn system(alpha: f64, n: usize) -> EffectiveSystem {
        let cfg = WaveguideConfig::new(n, 40.0 * std::f64::consts::PI, 1.0, alpha).unwrap();
        let modes = build_modes(&cfg).unwrap();
        let o = SolverOptions::default();
        let single = solve_single(1.0, &modes, &o).unwrap();
        let two = solve_two(1.0, 2.0 * std::f64::consts::PI, &modes, &o).unwrap();
        build_effective(&two, &single, &modes, 0.0).unwrap()
    }

    #[test]
    fn uncoupled_state_is_stationary() {
        let sys = system(0.0, 101);
        assert!(sys.g_eff.iter().all(|&g| g == 0.0));
        assert_eq!(sys.tilde_delta_r, 1.0);
        let init = ExcitationState::prepare(InitialState::ExcitedGround, 101);
        let traj = evolve(&sys, &init, 1e-3, 1.0, 100).unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.c1 - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(last.sz_pol, [1.0, -1.0]);
        assert_eq!(traj.samples.len(), 11);
    }

    #[test]
    fn rabi_exchange_without_field_coupling() {
        let mut sys = system(0.0, 51);
        sys.ising_j = 0.7;
        let init = ExcitationState::prepare(InitialState::ExcitedGround, 51);
        let traj = evolve(&sys, &init, 1e-3, 3.0, 500).unwrap();
        for s in &traj.samples {
            let (c, sn) = ((0.7 * s.t).cos(), (0.7 * s.t).sin());
            assert!((s.c1 - Complex64::new(c, 0.0)).norm() < 1e-10);
            assert!((s.c2 - Complex64::new(0.0, sn)).norm() < 1e-10);
            // -2 d ln|c_i|/dt for the exchange solution.
            if let Some(g1) = s.gamma[0] {
                assert!((g1 - 1.4 * (0.7 * s.t).tan()).abs() < 1e-8 * (1.0 + g1.abs()));
            }
            if let Some(g2) = s.gamma[1] {
                assert!((g2 + 1.4 / (0.7 * s.t).tan()).abs() < 1e-8 * (1.0 + g2.abs()));
            }
        }
    }

    #[test]
    fn polaron_sigma_z_cases() {
        let st = ExcitationState::prepare(InitialState::ExcitedGround, 3);
        assert_eq!(polaron_sigma_z(&st, 0.0), (1.0, -1.0));
        let st = ExcitationState::prepare(InitialState::Symmetric, 3);
        let (a, b) = polaron_sigma_z(&st, 0.0);
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_runs() {
        let sys = system(0.1, 51);
        let init = ExcitationState::prepare(InitialState::Symmetric, 51);
        let big = 1.0 / sys.omega_max();
        assert!(matches!(evolve(&sys, &init, big, 1.0, 1), Err(DynamicsError::StepTooLarge { .. })));
        assert!(matches!(
            evolve(&sys, &init, 1e-3, sys.recurrence_time(), 1),
            Err(DynamicsError::BeyondRecurrence { .. })
        ));
        assert!(matches!(evolve(&sys, &init, 1e-3, 1.0, 0), Err(DynamicsError::BadStride)));
        let short = ExcitationState::prepare(InitialState::Symmetric, 50);
        assert!(matches!(evolve(&sys, &short, 1e-3, 1.0, 1), Err(DynamicsError::LengthMismatch { .. })));
        let mut unnorm = init.clone();
        unnorm.c1 *= 2.0;
        assert!(matches!(evolve(&sys, &unnorm, 1e-3, 1.0, 1), Err(DynamicsError::NotNormalized(_))));
    }

    #[test]
    fn mismatched_modes_rejected() {
        let a = build_modes(&WaveguideConfig::new(51, 10.0, 1.0, 0.1).unwrap()).unwrap();
        let b = build_modes(&WaveguideConfig::new(53, 10.0, 1.0, 0.1).unwrap()).unwrap();
        let o = SolverOptions::default();
        let single = solve_single(1.0, &a, &o).unwrap();
        let two = solve_two(1.0, 1.0, &b, &o).unwrap();
        assert!(matches!(build_effective(&two, &single, &b, 0.0), Err(DynamicsError::MismatchedModes)));
        assert!(matches!(build_effective(&single, &single, &a, 0.0), Err(DynamicsError::WrongKind(_))));
    }
}
