//! wasm-bindgen exports behind `www/index.html`.
//!
//! Every export returns a flat `Float64Array` of fixed-width rows so the page
//! can plot without parsing. Row layouts are documented per function.

use thiserror::Error;
use wasm_bindgen::prelude::*;
use wqed::dynamics::{self, DynamicsError, ExcitationState, InitialState};
use wqed::polaron::{self, SolverError, SolverOptions};
use wqed::waveguide::{self, ModeSet, WaveguideConfig, WaveguideError};

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Waveguide(#[from] WaveguideError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("polaron solver did not converge")]
    NotConverged,
    #[error("unknown initial state `{0}` (use sym, antisym or eg)")]
    UnknownInit(String),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
}

/// Ring with unit cutoff used by the static panels.
fn unit_ring(n_modes: usize, alpha: f64) -> Result<ModeSet, DemoError> {
    Ok(waveguide::build_modes(&WaveguideConfig::with_cutoff(n_modes, 1.0, 1.0, alpha)?)?)
}

/// Rows of `[omega, J_binned (NaN if empty), J_analytic]`.
pub fn spectral_rows(alpha: f64, n_modes: usize, bins: usize) -> Result<Vec<f64>, DemoError> {
    let modes = unit_ring(n_modes, alpha)?;
    let bins = waveguide::spectral_function_reconstruct(&modes, bins)?;
    Ok(bins.iter().flat_map(|b| [b.center, b.j_binned.unwrap_or(f64::NAN), b.j_analytic]).collect())
}

/// Rows of `[x / dx, ising_J, sinc reference, delta_r]` for `points` separations in `[0, max_cells] dx`.
pub fn ising_rows(alpha: f64, delta: f64, max_cells: f64, points: usize) -> Result<Vec<f64>, DemoError> {
    if points < 2 {
        return Err(DemoError::TooFewPoints(points));
    }
    let modes = unit_ring(1001, alpha)?;
    let dx = modes.config().dx();
    let opts = SolverOptions::default();
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let cells = max_cells * i as f64 / (points - 1) as f64;
        let x = cells * dx;
        let sol = polaron::solve_two(delta, x, &modes, &opts)?;
        if !sol.converged {
            return Err(DemoError::NotConverged);
        }
        out.extend([cells, sol.ising_j, polaron::ising_sinc(alpha, 1.0, x, 1.0), sol.delta_r]);
    }
    Ok(out)
}

fn parse_init(s: &str) -> Result<InitialState, DemoError> {
    match s {
        "sym" => Ok(InitialState::Symmetric),
        "antisym" => Ok(InitialState::Antisymmetric),
        "eg" => Ok(InitialState::ExcitedGround),
        other => Err(DemoError::UnknownInit(other.to_string())),
    }
}

/// Emitters at the resonant separation `2 pi v_g / delta` on a ring of length
/// `40 pi` with `n_modes` modes. Rows of `[t, sz1_lab, sz2_lab, norm]`; the run
/// stops short of the ring recurrence.
pub fn dynamics_rows(alpha: f64, init: &str, n_modes: usize, t_max: f64) -> Result<Vec<f64>, DemoError> {
    let kind = parse_init(init)?;
    let delta = 1.0;
    let modes = waveguide::build_modes(&WaveguideConfig::new(n_modes, 40.0 * std::f64::consts::PI, 1.0, alpha)?)?;
    let x = 2.0 * std::f64::consts::PI / delta;
    let opts = SolverOptions::default();
    let single = polaron::solve_single(delta, &modes, &opts)?;
    let two = polaron::solve_two(delta, x, &modes, &opts)?;
    if !(single.converged && two.converged) {
        return Err(DemoError::NotConverged);
    }
    let sys = dynamics::build_effective(&two, &single, &modes, 0.0)?;
    let t_end = t_max.min(0.95 * sys.recurrence_time());
    let dt = 0.05 / sys.omega_max();
    let stride = ((0.1 / dt).ceil() as usize).max(1);
    let traj = dynamics::evolve(&sys, &ExcitationState::prepare(kind, modes.len()), dt, t_end, stride)?;
    Ok(traj.samples.iter().flat_map(|s| [s.t, s.sz_lab[0], s.sz_lab[1], s.norm]).collect())
}

#[wasm_bindgen]
pub fn spectral_density(alpha: f64, n_modes: usize, bins: usize) -> Result<Vec<f64>, JsError> {
    Ok(spectral_rows(alpha, n_modes, bins)?)
}

#[wasm_bindgen]
pub fn ising_profile(alpha: f64, delta: f64, max_cells: f64, points: usize) -> Result<Vec<f64>, JsError> {
    Ok(ising_rows(alpha, delta, max_cells, points)?)
}

#[wasm_bindgen]
pub fn emitter_dynamics(alpha: f64, init: &str, n_modes: usize, t_max: f64) -> Result<Vec<f64>, JsError> {
    Ok(dynamics_rows(alpha, init, n_modes, t_max)?)
}
