//! Markovian delay model for two emitters separated by `x`.
//!
//! ```text
//! dc_i/dt = i J c_j - (γ/2) c_i - (γ/2) e^{iφ} c_j(t - τ) Θ(t - τ),   τ = x / v_g
//! ```
//!
//! Before the first delay the solution is the exact 2×2 exponential. After it
//! the equations are integrated with RK4 on a grid that hits `τ` exactly;
//! delayed values at half steps come from cubic Hermite interpolation of the
//! stored history.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::polaron::PolaronSolution;
use crate::quadrature::Composite;
use crate::waveguide::{spectral_function_analytic, ModeSet};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdeError {
    #[error("expected a two-emitter solution")]
    NotTwoEmitter,
    #[error("solution did not converge")]
    NotConverged,
    #[error("effective splitting {value} lies outside the band (0, {omega_max})")]
    OutOfBand { value: f64, omega_max: f64 },
    #[error("emitters at zero separation have no delay")]
    ZeroDelay,
    #[error("time step {dt} exceeds a tenth of the delay {tau}")]
    StepTooLarge { dt: f64, tau: f64 },
    #[error("time step and end time must be positive and finite")]
    BadTime,
    #[error("initial populations sum to {0} > 1")]
    OverNormalized(f64),
    #[error("no closed form: {0}")]
    Unsupported(&'static str),
    #[error("pole at {pole} too close to the integration limits [0, {omega_c}]")]
    PoleAtEndpoint { pole: f64, omega_c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeSystem {
    pub gamma: f64,
    pub ising_j: f64,
    pub tilde_delta_r: f64,
    pub delta_r: f64,
    pub tau: f64,
    /// `Δ̃_r τ`, unreduced.
    pub phase: f64,
}

impl DdeSystem {
    /// `Δ̃_r τ` reduced to `[0, 2π)`.
    pub fn phase_mod(&self) -> f64 {
        self.phase.rem_euclid(TAU)
    }
}

/// `γ = 4 Δ_r² J(Δ̃_r) cos²θ / (Δ_r + Δ̃_r)²` with `J(ω) = π α ω`.
pub fn build_dde(sol: &PolaronSolution, modes: &ModeSet) -> Result<DdeSystem, DdeError> {
    let x = sol.x_sep.ok_or(DdeError::NotTwoEmitter)?;
    if !sol.converged {
        return Err(DdeError::NotConverged);
    }
    let cfg = modes.config();
    let td = sol.tilde_delta_r();
    let omega_max = modes.omega_max();
    if !(td > 0.0 && td < omega_max) {
        return Err(DdeError::OutOfBand { value: td, omega_max });
    }
    let dr = sol.delta_r;
    let gamma = 4.0 * dr * dr * spectral_function_analytic(td, cfg.alpha) * sol.theta.cos().powi(2)
        / (dr + td).powi(2);
    let tau = x / cfg.v_g;
    Ok(DdeSystem { gamma, ising_j: sol.ising_j, tilde_delta_r: td, delta_r: dr, tau, phase: td * tau })
}

/// Exact solution without the delayed term.
pub fn delay_free_flow(sys: &DdeSystem, c0: [Complex64; 2], t: f64) -> [Complex64; 2] {
    let damp = (-0.5 * sys.gamma * t).exp();
    let (s, c) = (sys.ising_j * t).sin_cos();
    let is = I * s;
    [damp * (c * c0[0] + is * c0[1]), damp * (is * c0[0] + c * c0[1])]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdeTrajectory {
    /// Grid step, `τ / ceil(τ / dt)`.
    pub h: f64,
    pub t: Vec<f64>,
    pub c: Vec<[Complex64; 2]>,
}

impl DdeTrajectory {
    pub fn norm(&self, i: usize) -> f64 {
        self.c[i][0].norm_sqr() + self.c[i][1].norm_sqr()
    }
}

struct History {
    c: Vec<[Complex64; 2]>,
    /// Derivative approached from the right (used as the left end of an interval).
    d_right: Vec<[Complex64; 2]>,
    d_left: Vec<[Complex64; 2]>,
}

impl History {
    fn push(&mut self, c: [Complex64; 2], d_left: [Complex64; 2], d_right: [Complex64; 2]) {
        self.c.push(c);
        self.d_left.push(d_left);
        self.d_right.push(d_right);
    }

    /// Cubic Hermite value at the midpoint of `[t_j, t_{j+1}]`.
    fn midpoint(&self, j: usize, h: f64) -> [Complex64; 2] {
        let (a, b) = (self.c[j], self.c[j + 1]);
        let (da, db) = (self.d_right[j], self.d_left[j + 1]);
        [0, 1].map(|i| 0.5 * (a[i] + b[i]) + 0.125 * h * (da[i] - db[i]))
    }
}

fn local(sys: &DdeSystem, c: [Complex64; 2]) -> [Complex64; 2] {
    let g = 0.5 * sys.gamma;
    [I * sys.ising_j * c[1] - g * c[0], I * sys.ising_j * c[0] - g * c[1]]
}

fn with_delay(sys: &DdeSystem, c: [Complex64; 2], delayed: [Complex64; 2]) -> [Complex64; 2] {
    let base = local(sys, c);
    let k = -0.5 * sys.gamma * Complex64::from_polar(1.0, sys.phase);
    [base[0] + k * delayed[1], base[1] + k * delayed[0]]
}

fn axpy(c: [Complex64; 2], w: f64, d: [Complex64; 2]) -> [Complex64; 2] {
    [c[0] + w * d[0], c[1] + w * d[1]]
}

/// Integrates the delay equations from `c0` at `t = 0` to `t_max`.
pub fn solve_dde(sys: &DdeSystem, c0: [Complex64; 2], dt: f64, t_max: f64) -> Result<DdeTrajectory, DdeError> {
    if !(dt > 0.0 && dt.is_finite() && t_max > 0.0 && t_max.is_finite()) {
        return Err(DdeError::BadTime);
    }
    if sys.tau == 0.0 {
        return Err(DdeError::ZeroDelay);
    }
    if dt > sys.tau / 10.0 {
        return Err(DdeError::StepTooLarge { dt, tau: sys.tau });
    }
    let p0 = c0[0].norm_sqr() + c0[1].norm_sqr();
    if p0 > 1.0 + 1e-12 {
        return Err(DdeError::OverNormalized(p0));
    }
    let m = (sys.tau / dt).ceil() as usize;
    let h = sys.tau / m as f64;
    let steps = (t_max / h).ceil() as usize;

    let mut hist = History { c: Vec::with_capacity(steps + 1), d_right: vec![], d_left: vec![] };
    let mut times = Vec::with_capacity(steps + 1);
    for n in 0..=m.min(steps) {
        let t = n as f64 * h;
        let c = delay_free_flow(sys, c0, t);
        let d = local(sys, c);
        let d_right = if n == m { with_delay(sys, c, c0) } else { d };
        hist.push(c, d, d_right);
        times.push(t);
    }
    for n in m..steps {
        let c = hist.c[n];
        let j = n - m;
        let k1 = hist.d_right[n];
        let mid = hist.midpoint(j, h);
        let k2 = with_delay(sys, axpy(c, 0.5 * h, k1), mid);
        let k3 = with_delay(sys, axpy(c, 0.5 * h, k2), mid);
        let k4 = with_delay(sys, axpy(c, h, k3), hist.c[j + 1]);
        let next = [0, 1].map(|i| c[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let d = with_delay(sys, next, hist.c[j + 1]);
        hist.push(next, d, d);
        times.push((n + 1) as f64 * h);
    }
    Ok(DdeTrajectory { h, t: times, c: hist.c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

/// Which phase satisfied the resonance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceConvention {
    /// `Δ̃_r x / v_g ≡ 0 (mod 2π)`.
    TildeDelta,
    /// `Δ_r x / v_g ≡ 0 (mod 2π)`.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// `|c_1(∞)|`.
    pub amplitude: f64,
    /// Polaron-frame `<σz_1>(∞)`.
    pub magnetization: f64,
    pub convention: ResonanceConvention,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateTolerance {
    /// Allowed distance of the delay phase from a multiple of 2π, radians.
    pub phase: f64,
    /// Allowed `|J| / Δ̃_r`.
    pub ising: f64,
}

impl Default for SteadyStateTolerance {
    fn default() -> Self {
        Self { phase: 1e-6, ising: 1e-6 }
    }
}

/// Bound-state amplitude `(1 + γτ/2)^{-1} / sqrt 2`.
pub fn bic_amplitude(gamma: f64, tau: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 / (1.0 + 0.5 * gamma * tau)
}

fn distance_to_lattice(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    r.min(TAU - r)
}

/// Long-time limit at resonance with negligible Ising coupling.
pub fn steady_state(sys: &DdeSystem, parity: Parity, tol: SteadyStateTolerance) -> Result<SteadyState, DdeError> {
    if sys.ising_j.abs() > tol.ising * sys.tilde_delta_r {
        return Err(DdeError::Unsupported("Ising coupling is not negligible"));
    }
    let convention = if distance_to_lattice(sys.phase) <= tol.phase {
        ResonanceConvention::TildeDelta
    } else if distance_to_lattice(sys.delta_r * sys.tau) <= tol.phase {
        ResonanceConvention::Delta
    } else {
        return Err(DdeError::Unsupported("delay phase is off resonance"));
    };
    let amplitude = match parity {
        Parity::Symmetric => 0.0,
        Parity::Antisymmetric => bic_amplitude(sys.gamma, sys.tau),
    };
    Ok(SteadyState { amplitude, magnetization: 2.0 * amplitude * amplitude - 1.0, convention })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrincipalValueMethod {
    /// Fold a symmetric window around the pole onto itself.
    SymmetricWindow,
    /// Subtract the residue over the whole range and add its log integral.
    GlobalSubtraction,
}

/// Lamb shift `2αΔ_r² P∫_0^{ω_c} ω / ((ω+Δ_r)² (Δ̃_r-ω)) dω`.
pub fn lamb_shift(sol: &PolaronSolution, modes: &ModeSet) -> Result<f64, DdeError> {
    lamb_shift_with(sol, modes, PrincipalValueMethod::SymmetricWindow, &Composite::new(20, 64))
}

pub fn lamb_shift_with(
    sol: &PolaronSolution,
    modes: &ModeSet,
    method: PrincipalValueMethod,
    quad: &Composite,
) -> Result<f64, DdeError> {
    let cfg = modes.config();
    let (alpha, wc, dr) = (cfg.alpha, cfg.omega_c(), sol.delta_r);
    let pole = sol.tilde_delta_r();
    let margin = 1e3 * f64::EPSILON * wc;
    if !(pole > margin && wc - pole > margin) {
        return Err(DdeError::PoleAtEndpoint { pole, omega_c: wc });
    }
    if alpha == 0.0 || dr == 0.0 {
        return Ok(0.0);
    }
    let h = |w: f64| 2.0 * alpha * dr * dr * w / ((w + dr) * (w + dr));
    let value = match method {
        PrincipalValueMethod::SymmetricWindow => {
            let a = pole.min(wc - pole);
            let core = quad.integrate(0.0, a, |u| (h(pole - u) - h(pole + u)) / u);
            let rest = if pole + a < wc {
                quad.integrate(pole + a, wc, |w| h(w) / (pole - w))
            } else {
                quad.integrate(0.0, pole - a, |w| h(w) / (pole - w))
            };
            core + rest
        }
        PrincipalValueMethod::GlobalSubtraction => {
            let hp = h(pole);
            let lo = quad.integrate(0.0, pole, |w| (h(w) - hp) / (pole - w));
            let hi = quad.integrate(pole, wc, |w| (h(w) - hp) / (pole - w));
            lo + hi + hp * (pole / (wc - pole)).ln()
        }
    };
    Ok(value)
}

/// Weak-coupling single-emitter rate `π α Δ_r`.
pub fn golden_rule_rate(alpha: f64, delta_r: f64) -> f64 {
    PI * alpha * delta_r
}
