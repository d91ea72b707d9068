//! Variational polaron ground state for one or two emitters.
//!
//! The single-emitter problem is a scalar fixed point for the renormalized
//! splitting `delta_r`. For two emitters separated by `x` the displacements
//! `f_k`, `delta_r` and the photon-mediated Ising coupling are solved jointly.
//! Both solvers use damped iteration and keep the lower-energy branch when
//! the iteration started from the bare splitting and the one started from the
//! localized limit disagree.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{cisi, sinc};
use crate::waveguide::ModeSet;

/// Below this fraction of the bare splitting the emitter is reported localized.
pub const LOCALIZATION_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("bare splitting must be positive and finite (got {0})")]
    BadDelta(f64),
    #[error("emitter separation must be non-negative and finite (got {0})")]
    BadSeparation(f64),
    #[error("invalid solver options: {0}")]
    BadOptions(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative convergence tolerance on `delta_r` and the Ising coupling.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial mixing weight of the new iterate; halved on oscillation.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000, damping: 0.5 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(SolverError::BadOptions("tol must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(SolverError::BadOptions("max_iter must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolverError::BadOptions("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolaronSolution {
    /// Variational displacement per mode, aligned with the mode arrays.
    pub f: Vec<f64>,
    pub delta_r: f64,
    /// Zero for a single emitter.
    pub ising_j: f64,
    /// `sqrt(delta_r^2 + ising_j^2)`.
    pub cal_e: f64,
    pub theta: f64,
    pub e_gs: f64,
    /// `None` for the single-emitter solve.
    pub x_sep: Option<f64>,
    pub bare_delta: f64,
    pub converged: bool,
    pub localized: bool,
    pub iterations: usize,
    pub modes_fingerprint: u64,
}

impl PolaronSolution {
    pub fn is_two_emitter(&self) -> bool {
        self.x_sep.is_some()
    }

    pub fn renormalization(&self) -> f64 {
        self.delta_r / self.bare_delta
    }

    /// Detuning entering the single-excitation dynamics,
    /// `delta_r cos 2θ + J sin 2θ`.
    pub fn tilde_delta_r(&self) -> f64 {
        self.delta_r * (2.0 * self.theta).cos() + self.ising_j * (2.0 * self.theta).sin()
    }
}

/// Lowest eigenpair of the two-spin Hamiltonian restricted to `{|gg>, |ee>}`:
/// `[[-delta_r, -J], [-J, delta_r]]`.
///
/// Returns `(energy, theta)` with the eigenvector `cos θ |gg> + sin θ |ee>`
/// normalized so that `cos θ >= 0`.
pub fn effective_ground_state(delta_r: f64, ising_j: f64) -> (f64, f64) {
    (-delta_r.hypot(ising_j), 0.5 * ising_j.atan2(delta_r))
}

/// `cos θ` and `sin θ` from the closed-form expressions in `delta_r` and `J`.
pub fn mixing_angle_closed_form(delta_r: f64, ising_j: f64) -> (f64, f64) {
    let e = delta_r.hypot(ising_j);
    let norm = ((delta_r + e).powi(2) + ising_j * ising_j).sqrt();
    if norm == 0.0 {
        return (1.0, 0.0);
    }
    ((delta_r + e) / norm, ising_j / norm)
}

fn check_delta(delta: f64) -> Result<(), SolverError> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(SolverError::BadDelta(delta))
    }
}

/// Single-emitter displacement `g / (omega + delta_r)`.
fn single_displacement(g: f64, omega: f64, delta_r: f64) -> f64 {
    let den = omega + delta_r;
    if g == 0.0 || den == 0.0 {
        0.0
    } else {
        g / den
    }
}

fn single_map(delta: f64, modes: &ModeSet, delta_r: f64) -> f64 {
    let s: f64 = modes
        .g
        .iter()
        .zip(&modes.omega)
        .map(|(&g, &w)| single_displacement(g, w, delta_r).powi(2))
        .sum();
    delta * (-2.0 * s).exp()
}

struct Iterate {
    delta_r: f64,
    ising_j: f64,
    converged: bool,
    iterations: usize,
}

/// Damped scalar fixed point for the single emitter.
fn iterate_single(delta: f64, modes: &ModeSet, start: f64, opts: &SolverOptions) -> Iterate {
    let mut eta = opts.damping;
    let mut dr = start;
    let mut last_step = 0.0;
    for it in 1..=opts.max_iter {
        let mapped = single_map(delta, modes, dr);
        let step = eta * (mapped - dr);
        if step * last_step < 0.0 {
            eta = (eta * 0.5).max(1e-3);
        }
        last_step = step;
        let next = dr + step;
        if next < LOCALIZATION_THRESHOLD * delta {
            return Iterate { delta_r: 0.0, ising_j: 0.0, converged: true, iterations: it };
        }
        if (mapped - dr).abs() <= opts.tol * dr.max(next) {
            return Iterate { delta_r: dr, ising_j: 0.0, converged: true, iterations: it };
        }
        dr = next;
    }
    Iterate { delta_r: dr, ising_j: 0.0, converged: false, iterations: opts.max_iter }
}

fn single_energy(modes: &ModeSet, f: &[f64], delta_r: f64) -> f64 {
    let bath: f64 = f
        .iter()
        .zip(&modes.omega)
        .zip(&modes.g)
        .map(|((&f, &w), &g)| f * (w * f - 2.0 * g))
        .sum();
    -0.5 * delta_r + bath
}

/// Self-consistent single-emitter polaron: `f_k = g_k / (omega_k + delta_r)`,
/// `delta_r = delta exp(-2 sum_k f_k^2)`.
pub fn solve_single(
    delta: f64,
    modes: &ModeSet,
    opts: &SolverOptions,
) -> Result<PolaronSolution, SolverError> {
    check_delta(delta)?;
    opts.validate()?;

    let upper = iterate_single(delta, modes, delta, opts);
    let lower = iterate_single(delta, modes, single_map(delta, modes, 0.0), opts);
    let build = |it: &Iterate| {
        let f: Vec<f64> = modes
            .g
            .iter()
            .zip(&modes.omega)
            .map(|(&g, &w)| single_displacement(g, w, it.delta_r))
            .collect();
        let e_gs = single_energy(modes, &f, it.delta_r);
        PolaronSolution {
            f,
            delta_r: it.delta_r,
            ising_j: 0.0,
            cal_e: it.delta_r,
            theta: 0.0,
            e_gs,
            x_sep: None,
            bare_delta: delta,
            converged: it.converged,
            localized: it.delta_r == 0.0,
            iterations: it.iterations,
            modes_fingerprint: modes.fingerprint(),
        }
    };
    Ok(pick_branch(build(&upper), build(&lower)))
}

/// Keeps the lower variational energy among converged candidates.
fn pick_branch(upper: PolaronSolution, lower: PolaronSolution) -> PolaronSolution {
    let iterations = upper.iterations + lower.iterations;
    let mut best = match (upper.converged, lower.converged) {
        (true, false) => upper,
        (false, true) => lower,
        _ => {
            if lower.e_gs < upper.e_gs {
                lower
            } else {
                upper
            }
        }
    };
    best.iterations = iterations;
    best
}

/// Two-emitter displacement
/// `f_k = (g/ω) (E + J cos kx) / (E + J cos kx + delta_r^2/ω)`.
fn two_displacement(g: f64, omega: f64, cal_e: f64, ising_j: f64, cos_kx: f64, delta_r: f64) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    let a = cal_e + ising_j * cos_kx;
    let den = omega * a + delta_r * delta_r;
    if den <= 0.0 {
        0.0
    } else {
        g * a / den
    }
}

struct TwoMaps {
    delta_r: f64,
    ising_j: f64,
}

fn two_maps(delta: f64, modes: &ModeSet, cos_kx: &[f64], delta_r: f64, ising_j: f64) -> TwoMaps {
    let cal_e = delta_r.hypot(ising_j);
    let mut f2 = 0.0;
    let mut jsum = 0.0;
    for i in 0..modes.len() {
        let (g, w) = (modes.g[i], modes.omega[i]);
        let f = two_displacement(g, w, cal_e, ising_j, cos_kx[i], delta_r);
        f2 += f * f;
        jsum += f * (2.0 * g - w * f) * cos_kx[i];
    }
    TwoMaps { delta_r: delta * (-2.0 * f2).exp(), ising_j: 2.0 * jsum }
}

fn iterate_two(
    delta: f64,
    modes: &ModeSet,
    cos_kx: &[f64],
    start: (f64, f64),
    opts: &SolverOptions,
) -> Iterate {
    let mut eta = opts.damping;
    let (mut dr, mut jj) = start;
    let mut last = (0.0, 0.0);
    for it in 1..=opts.max_iter {
        let m = two_maps(delta, modes, cos_kx, dr, jj);
        let step = (eta * (m.delta_r - dr), eta * (m.ising_j - jj));
        if step.0 * last.0 < 0.0 || step.1 * last.1 < 0.0 {
            eta = (eta * 0.5).max(1e-3);
        }
        last = step;
        let scale = dr.max(LOCALIZATION_THRESHOLD * delta);
        let done = (m.delta_r - dr).abs() <= opts.tol * scale
            && (m.ising_j - jj).abs() <= opts.tol * jj.abs().max(scale);
        if done {
            return Iterate { delta_r: dr, ising_j: jj, converged: true, iterations: it };
        }
        dr += step.0;
        jj += step.1;
        if dr < LOCALIZATION_THRESHOLD * delta {
            // Localized limit: delta_r = 0, J follows from the g/ω displacements.
            let m0 = two_maps(delta, modes, cos_kx, 0.0, jj);
            return Iterate { delta_r: 0.0, ising_j: m0.ising_j, converged: true, iterations: it };
        }
    }
    Iterate { delta_r: dr, ising_j: jj, converged: false, iterations: opts.max_iter }
}

fn two_energy(modes: &ModeSet, f: &[f64], cal_e: f64) -> f64 {
    let bath: f64 = f
        .iter()
        .zip(&modes.omega)
        .zip(&modes.g)
        .map(|((&f, &w), &g)| f * (w * f - 2.0 * g))
        .sum();
    -cal_e + 2.0 * bath
}

/// Joint fixed point of `{f_k, delta_r, J}` for two emitters at separation `x`.
pub fn solve_two(
    delta: f64,
    x: f64,
    modes: &ModeSet,
    opts: &SolverOptions,
) -> Result<PolaronSolution, SolverError> {
    check_delta(delta)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SolverError::BadSeparation(x));
    }
    opts.validate()?;
    let cfg = modes.config();
    let cos_kx: Vec<f64> = modes.k.iter().map(|&k| (k * x).cos()).collect();

    let j0 = ising_sinc(cfg.alpha, cfg.omega_c(), x, cfg.v_g);
    let upper = iterate_two(delta, modes, &cos_kx, (delta, j0), opts);
    let m0 = two_maps(delta, modes, &cos_kx, 0.0, j0);
    let lower = iterate_two(delta, modes, &cos_kx, (m0.delta_r, m0.ising_j), opts);

    let build = |it: &Iterate| {
        let cal_e = it.delta_r.hypot(it.ising_j);
        let f: Vec<f64> = (0..modes.len())
            .map(|i| {
                two_displacement(modes.g[i], modes.omega[i], cal_e, it.ising_j, cos_kx[i], it.delta_r)
            })
            .collect();
        let e_gs = two_energy(modes, &f, cal_e);
        let (_, theta) = effective_ground_state(it.delta_r, it.ising_j);
        PolaronSolution {
            f,
            delta_r: it.delta_r,
            ising_j: it.ising_j,
            cal_e,
            theta,
            e_gs,
            x_sep: Some(x),
            bare_delta: delta,
            converged: it.converged,
            localized: it.delta_r == 0.0,
            iterations: it.iterations,
            modes_fingerprint: modes.fingerprint(),
        }
    };
    Ok(pick_branch(build(&upper), build(&lower)))
}

/// Relative residuals of the defining equations at a converged solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub f: f64,
    pub delta_r: f64,
    pub ising_j: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.f.max(self.delta_r).max(self.ising_j)
    }
}

/// Substitutes `(f, delta_r, J)` back into the three defining equations.
///
/// Localized solutions (`delta_r = 0`) report the `delta_r` residual as zero:
/// the exponential map is only consistent with zero in the continuum.
pub fn fixed_point_residuals(sol: &PolaronSolution, modes: &ModeSet) -> Residuals {
    let x = sol.x_sep.unwrap_or(0.0);
    let two = sol.is_two_emitter();
    let mut f_res: f64 = 0.0;
    let mut f_scale: f64 = 0.0;
    let mut f2 = 0.0;
    let mut jsum = 0.0;
    for i in 0..modes.len() {
        let (g, w) = (modes.g[i], modes.omega[i]);
        let c = (modes.k[i] * x).cos();
        let expected = if two {
            two_displacement(g, w, sol.cal_e, sol.ising_j, c, sol.delta_r)
        } else {
            single_displacement(g, w, sol.delta_r)
        };
        let fi = sol.f[i];
        f_res = f_res.max((fi - expected).abs());
        f_scale = f_scale.max(fi.abs());
        f2 += fi * fi;
        jsum += fi * (2.0 * g - w * fi) * c;
    }
    let dr_map = sol.bare_delta * (-2.0 * f2).exp();
    let delta_r = if sol.localized { 0.0 } else { (dr_map - sol.delta_r).abs() / sol.delta_r };
    let ising_j = if two {
        let scale = sol.ising_j.abs().max(sol.delta_r).max(f64::MIN_POSITIVE);
        (2.0 * jsum - sol.ising_j).abs() / scale
    } else {
        0.0
    };
    Residuals {
        f: if f_scale > 0.0 { f_res / f_scale } else { 0.0 },
        delta_r,
        ising_j,
    }
}

/// Large-coupling Ising estimate `alpha omega_c sinc(omega_c x / v_g)`.
pub fn ising_sinc(alpha: f64, omega_c: f64, x: f64, v_g: f64) -> f64 {
    alpha * omega_c * sinc(omega_c * x / v_g)
}

/// Ising coupling of the continuum model with the full single-emitter
/// displacements, in closed form with cosine and sine integrals.
pub fn ising_corrected(alpha: f64, omega_c: f64, x: f64, v_g: f64, delta_r: f64) -> f64 {
    let base = ising_sinc(alpha, omega_c, x, v_g);
    if delta_r == 0.0 {
        return base;
    }
    let big = delta_r + omega_c;
    let b = x / v_g;
    let cos_term = alpha * delta_r * delta_r * (omega_c * b).cos() / big;
    if b == 0.0 {
        return base + cos_term - alpha * delta_r;
    }
    let (u_lo, u_hi) = (b * delta_r, b * big);
    let (ci_lo, si_lo) = cisi(u_lo);
    let (ci_hi, si_hi) = cisi(u_hi);
    let bracket = u_lo * u_lo.sin() * (ci_lo - ci_hi) + u_lo * u_lo.cos() * (si_hi - si_lo) - 1.0;
    base + cos_term + alpha * delta_r * bracket
}

/// `phi(x) = 4 sum_k f_k^2 sin kx`, `zeta(x) = 4 sum_k f_k^2 cos kx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryPhases {
    pub phi_x: f64,
    pub zeta_x: f64,
}

/// Phases summed over all signed `k` (the default convention).
pub fn auxiliary_phases(sol: &PolaronSolution, modes: &ModeSet) -> AuxiliaryPhases {
    phases_filtered(sol, modes, |_| true)
}

/// Sensitivity variant restricted to `k > 0`. Not used by default.
pub fn auxiliary_phases_positive_k(sol: &PolaronSolution, modes: &ModeSet) -> AuxiliaryPhases {
    phases_filtered(sol, modes, |k| k > 0.0)
}

fn phases_filtered(sol: &PolaronSolution, modes: &ModeSet, keep: impl Fn(f64) -> bool) -> AuxiliaryPhases {
    let x = sol.x_sep.unwrap_or(0.0);
    let (mut phi, mut zeta) = (0.0, 0.0);
    for (&f, &k) in sol.f.iter().zip(&modes.k) {
        if keep(k) {
            phi += f * f * (k * x).sin();
            zeta += f * f * (k * x).cos();
        }
    }
    AuxiliaryPhases { phi_x: 4.0 * phi, zeta_x: 4.0 * zeta }
}

/// `<σz_j> = -(delta_r/delta) cos 2θ cos φ(x)`.
pub fn gs_magnetization(sol: &PolaronSolution, phases: &AuxiliaryPhases) -> f64 {
    -sol.renormalization() * (2.0 * sol.theta).cos() * phases.phi_x.cos()
}

/// Two-emitter reduced density matrix in the `σx` basis `{--, -+, +-, ++}`.
pub fn reduced_density_matrix(sol: &PolaronSolution, phases: &AuxiliaryPhases) -> Matrix4<Complex64> {
    let r = sol.renormalization();
    let sc = sol.theta.sin() * sol.theta.cos();
    let plus = 0.5 + sc;
    let minus = 0.5 - sc;
    let off = Complex64::new(-0.5 * r * (2.0 * sol.theta).cos(), 0.0);
    let eph = Complex64::from_polar(1.0, phases.phi_x);
    let anti_pp = Complex64::new(r * r * plus * (-phases.zeta_x).exp(), 0.0);
    let anti_mm = Complex64::new(r * r * minus * phases.zeta_x.exp(), 0.0);
    let re = |v: f64| Complex64::new(v, 0.0);
    #[rustfmt::skip]
    let m = Matrix4::new(
        re(plus),          off,               off * eph,         anti_pp,
        off,               re(minus),         anti_mm,           off * eph.conj(),
        off * eph.conj(),  anti_mm,           re(minus),         off,
        anti_pp,           off * eph,         off,               re(plus),
    );
    let rho = m * Complex64::new(0.5, 0.0);
    debug_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    debug_assert!((rho - rho.adjoint()).norm() < 1e-12);
    rho
}

/// Linear entropy `1 - Tr ρ^2` of the two-emitter reduced state.
pub fn linear_entropy(sol: &PolaronSolution, phases: &AuxiliaryPhases) -> f64 {
    let r = sol.renormalization();
    let sc = sol.theta.sin() * sol.theta.cos();
    let c2 = (2.0 * sol.theta).cos();
    let (minus, plus) = (0.5 - sc, 0.5 + sc);
    let r2 = r * r;
    let r4 = r2 * r2;
    1.0 - 0.5 * r2 * c2 * c2
        - 0.5 * minus * minus
        - 0.5 * plus * plus
        - 0.5 * r4 * (2.0 * phases.zeta_x).exp() * minus * minus
        - 0.5 * r4 * (-2.0 * phases.zeta_x).exp() * plus * plus
}

/// Infinite-separation limit `(3 - 2 r^2 - r^4) / 4`, `r = delta_r / delta`.
pub fn linear_entropy_infinite_distance(renormalization: f64) -> f64 {
    let r2 = renormalization * renormalization;
    0.25 * (3.0 - 2.0 * r2 - r2 * r2)
}

/// Continuum scaling-limit estimates of `delta_r / delta`.
pub mod scaling {
    /// Single emitter: `(delta/omega_c)^(alpha/(1-alpha))`.
    pub fn single(delta_over_wc: f64, alpha: f64) -> f64 {
        delta_over_wc.powf(alpha / (1.0 - alpha))
    }

    /// Two emitters at infinite separation: `(e delta/omega_c)^(alpha/(1-alpha))`.
    pub fn two_far(delta_over_wc: f64, alpha: f64) -> f64 {
        (std::f64::consts::E * delta_over_wc).powf(alpha / (1.0 - alpha))
    }
}
