//! Computations behind each subcommand, returned as tables.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;
use wqed::dde::{self, DdeSystem, DdeTrajectory, Parity, SteadyState, SteadyStateTolerance};
use wqed::dynamics::{self, EffectiveSystem, ExcitationState, InitialState, Trajectory};
use wqed::oracle::{self, OracleModel};
use wqed::polaron::{self, PolaronSolution};
use wqed::waveguide::{self, ModeSet};

use crate::config::{ConfigError, Init, RunConfig};
use crate::output::{num, opt, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

pub fn modes_at(cfg: &RunConfig, alpha: f64) -> Result<ModeSet, RunError> {
    waveguide::build_modes(&cfg.waveguide_at(alpha)).map_err(|e| RunError::Config(e.into()))
}

pub const SPECTRAL_HEADER: &[&str] = &["omega", "J_binned", "J_analytic"];

pub fn spectral(cfg: &RunConfig, alpha: f64) -> Result<Table, RunError> {
    let modes = modes_at(cfg, alpha)?;
    let bins = waveguide::spectral_function_reconstruct(&modes, cfg.spectral_bins)
        .map_err(|e| RunError::Config(e.into()))?;
    let mut t = Table::new(SPECTRAL_HEADER);
    for b in bins {
        t.push(vec![num(b.center), opt(b.j_binned), num(b.j_analytic)]);
    }
    Ok(t)
}

pub const GROUND_STATE_HEADER: &[&str] =
    &["alpha", "x", "delta_r", "ising_J", "theta", "e_gs", "magnetization", "entropy", "converged", "iterations"];

/// One row of the ground-state sweep.
#[derive(Debug, Clone)]
pub struct GroundRow {
    pub alpha: f64,
    pub x: f64,
    pub sol: PolaronSolution,
    pub magnetization: f64,
    pub entropy: f64,
}

pub fn ground_state_point(cfg: &RunConfig, modes: &ModeSet, x: f64) -> Result<GroundRow, RunError> {
    let sol = polaron::solve_two(cfg.delta, x, modes, &cfg.solver).map_err(numerical)?;
    let ph = polaron::auxiliary_phases(&sol, modes);
    Ok(GroundRow {
        alpha: modes.config().alpha,
        x,
        magnetization: polaron::gs_magnetization(&sol, &ph),
        entropy: polaron::linear_entropy(&sol, &ph),
        sol,
    })
}

/// Solves every `(alpha, x)` pair; rows are ordered alpha-major.
pub fn ground_state_sweep(cfg: &RunConfig) -> Result<Vec<GroundRow>, RunError> {
    let per_alpha: Vec<Result<Vec<GroundRow>, RunError>> = cfg
        .alpha
        .par_iter()
        .map(|&a| {
            let modes = modes_at(cfg, a)?;
            cfg.x_sep.par_iter().map(|&x| ground_state_point(cfg, &modes, x)).collect()
        })
        .collect();
    let mut rows = vec![];
    for r in per_alpha {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn ground_state_table(rows: &[GroundRow]) -> Table {
    let mut t = Table::new(GROUND_STATE_HEADER);
    for r in rows {
        let s = &r.sol;
        t.push(vec![
            num(r.alpha),
            num(r.x),
            num(s.delta_r),
            num(s.ising_j),
            num(s.theta),
            num(s.e_gs),
            num(r.magnetization),
            num(r.entropy),
            s.converged.to_string(),
            s.iterations.to_string(),
        ]);
    }
    t
}

/// Converged single- and two-emitter solutions on one ring.
#[derive(Debug, Clone)]
pub struct Setup {
    pub modes: ModeSet,
    pub single: PolaronSolution,
    pub two: PolaronSolution,
}

pub fn setup(cfg: &RunConfig, alpha: f64, x: f64) -> Result<Setup, RunError> {
    let modes = modes_at(cfg, alpha)?;
    let single = polaron::solve_single(cfg.delta, &modes, &cfg.solver).map_err(numerical)?;
    let two = polaron::solve_two(cfg.delta, x, &modes, &cfg.solver).map_err(numerical)?;
    if !(single.converged && two.converged) {
        return Err(RunError::Numerical(format!("polaron solver did not converge at alpha = {alpha}, x = {x}")));
    }
    Ok(Setup { modes, single, two })
}

pub fn initial_state(init: Init) -> InitialState {
    match init {
        Init::Sym => InitialState::Symmetric,
        Init::Antisym => InitialState::Antisymmetric,
        Init::Eg => InitialState::ExcitedGround,
    }
}

pub const DYNAMICS_HEADER: &[&str] = &[
    "t", "re_c1", "im_c1", "re_c2", "im_c2", "sz1_pol", "sz2_pol", "sz1_lab", "sz2_lab", "gamma1", "gamma2", "norm",
];

pub struct DynamicsRun {
    pub setup: Setup,
    pub system: EffectiveSystem,
    pub trajectory: Trajectory,
}

pub fn dynamics_run(cfg: &RunConfig, alpha: f64, x: f64, init: Init) -> Result<DynamicsRun, RunError> {
    let setup = setup(cfg, alpha, x)?;
    let system = dynamics::build_effective(&setup.two, &setup.single, &setup.modes, cfg.dynamics.epsilon)
        .map_err(numerical)?;
    let start = ExcitationState::prepare(initial_state(init), setup.modes.len());
    let d = &cfg.dynamics;
    let trajectory = dynamics::evolve(&system, &start, d.dt, d.t_max, d.stride).map_err(numerical)?;
    Ok(DynamicsRun { setup, system, trajectory })
}

pub fn dynamics_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(DYNAMICS_HEADER);
    for s in &traj.samples {
        t.push(vec![
            num(s.t),
            num(s.c1.re),
            num(s.c1.im),
            num(s.c2.re),
            num(s.c2.im),
            num(s.sz_pol[0]),
            num(s.sz_pol[1]),
            num(s.sz_lab[0]),
            num(s.sz_lab[1]),
            opt(s.gamma[0]),
            opt(s.gamma[1]),
            num(s.norm),
        ]);
    }
    t
}

pub const DDE_HEADER: &[&str] = &["t", "re_c1", "im_c1", "re_c2", "im_c2", "norm"];

pub struct DdeRun {
    pub system: DdeSystem,
    pub trajectory: DdeTrajectory,
    /// `None` away from resonance.
    pub steady: Option<SteadyState>,
}

pub fn dde_initial(init: Init) -> Result<([Complex64; 2], Parity), RunError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match init {
        Init::Sym => Ok(([Complex64::new(h, 0.0), Complex64::new(h, 0.0)], Parity::Symmetric)),
        Init::Antisym => Ok(([Complex64::new(h, 0.0), Complex64::new(-h, 0.0)], Parity::Antisymmetric)),
        Init::Eg => Err(RunError::Config(ConfigError::Invalid {
            field: "dde.init".into(),
            reason: "must be `sym` or `antisym`".into(),
        })),
    }
}

pub fn dde_run(cfg: &RunConfig, alpha: f64, x: f64, init: Init) -> Result<DdeRun, RunError> {
    let (c0, parity) = dde_initial(init)?;
    let modes = modes_at(cfg, alpha)?;
    let two = polaron::solve_two(cfg.delta, x, &modes, &cfg.solver).map_err(numerical)?;
    let system = dde::build_dde(&two, &modes).map_err(numerical)?;
    let trajectory = dde::solve_dde(&system, c0, cfg.dde.dt, cfg.dde.t_max).map_err(numerical)?;
    let steady = dde::steady_state(&system, parity, SteadyStateTolerance::default()).ok();
    Ok(DdeRun { system, trajectory, steady })
}

/// Footer row: `#steady_state,gamma=..,tau=..,phase_mod=..,amplitude=..,magnetization=..,convention=..`.
pub fn steady_state_footer(run: &DdeRun) -> String {
    let s = &run.system;
    let (amp, mag, conv) = match &run.steady {
        Some(st) => (num(st.amplitude), num(st.magnetization), format!("{:?}", st.convention)),
        None => ("nan".into(), "nan".into(), "none".into()),
    };
    format!(
        "#steady_state,gamma={},tau={},phase_mod={},amplitude={amp},magnetization={mag},convention={conv}",
        num(s.gamma),
        num(s.tau),
        num(s.phase_mod()),
    )
}

pub fn dde_table(run: &DdeRun) -> Table {
    let tr = &run.trajectory;
    let mut t = Table::new(DDE_HEADER);
    for (i, c) in tr.c.iter().enumerate() {
        t.push(vec![num(tr.t[i]), num(c[0].re), num(c[0].im), num(c[1].re), num(c[1].im), num(tr.norm(i))]);
    }
    t.footer.push(steady_state_footer(run));
    t
}

pub const ORACLE_HEADER: &[&str] = &["alpha", "x", "e_exact", "e_polaron", "gap", "parity"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub alpha: f64,
    pub x: f64,
    pub e_exact: f64,
    pub e_polaron: f64,
    pub parity: i8,
}

impl OracleRow {
    /// Signed `e_exact - e_polaron`; non-positive when the bound holds.
    pub fn gap(&self) -> f64 {
        self.e_exact - self.e_polaron
    }
}

/// Exact and variational energies on the same truncated mode set.
pub fn oracle_point(
    cfg: &RunConfig,
    alpha: f64,
    x: f64,
    n_modes: usize,
    n_ph_max: usize,
) -> Result<OracleRow, RunError> {
    let modes = modes_at(cfg, alpha)?;
    let idx = oracle::select_oracle_modes(&modes, n_modes, cfg.delta).map_err(numerical)?;
    let sub = modes.subset(&idx);
    let pol = polaron::solve_two(cfg.delta, x, &sub, &cfg.solver).map_err(numerical)?;
    if !pol.converged {
        return Err(RunError::Numerical(format!("polaron solver did not converge on {n_modes} modes")));
    }
    let model = OracleModel::build(&sub, cfg.delta, 2, x, n_ph_max).map_err(numerical)?;
    let gs = oracle::exact_ground(&model).map_err(numerical)?;
    Ok(OracleRow { alpha, x, e_exact: gs.energy, e_polaron: pol.e_gs, parity: gs.parity })
}

pub fn oracle_sweep(cfg: &RunConfig, n_modes: usize, n_ph_max: usize) -> Result<Vec<OracleRow>, RunError> {
    let points: Vec<(f64, f64)> =
        cfg.alpha.iter().flat_map(|&a| cfg.x_sep.iter().map(move |&x| (a, x))).collect();
    points.par_iter().map(|&(a, x)| oracle_point(cfg, a, x, n_modes, n_ph_max)).collect()
}

pub fn oracle_table(rows: &[OracleRow]) -> Table {
    let mut t = Table::new(ORACLE_HEADER);
    for r in rows {
        t.push(vec![num(r.alpha), num(r.x), num(r.e_exact), num(r.e_polaron), num(r.gap()), r.parity.to_string()]);
    }
    t
}
