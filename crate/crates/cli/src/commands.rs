//! Runs one command and writes its CSV files plus a manifest.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::compute::{self, RunError};
use crate::config::{ensure_writable, Defaults, RunConfig};
use crate::output::{num, tag, FileEntry, Manifest, Table, Writer};
use crate::recipe::{run_recipe, Recipe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectral,
    GroundState,
    Dynamics,
    Dde,
    Oracle,
    Recipe(Recipe),
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectral => "spectral",
            Command::GroundState => "ground_state",
            Command::Dynamics => "dynamics",
            Command::Dde => "dde",
            Command::Oracle => "oracle",
            Command::Recipe(r) => r.name(),
        }
    }

    pub fn defaults(self) -> Defaults {
        match self {
            Command::Spectral | Command::GroundState | Command::Oracle => Defaults::ground_state(),
            Command::Dynamics | Command::Dde => Defaults::dynamics(),
            Command::Recipe(r) => r.defaults(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    /// Set when results were written but some point failed to converge.
    pub failure: Option<String>,
}

struct Outputs {
    tables: Vec<(String, Table)>,
    derived: Vec<(String, f64)>,
    summary: Vec<String>,
    unconverged: usize,
}

fn grid_pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.alpha.iter().flat_map(|&a| cfg.x_sep.iter().map(move |&x| (a, x))).collect()
}

fn compute(cmd: Command, cfg: &RunConfig) -> Result<Outputs, RunError> {
    let mut out = Outputs { tables: vec![], derived: vec![], summary: vec![], unconverged: 0 };
    match cmd {
        Command::Spectral => {
            for &a in &cfg.alpha {
                out.tables.push((format!("spectral_alpha{}.csv", tag(a)), compute::spectral(cfg, a)?));
            }
        }
        Command::GroundState => {
            let rows = compute::ground_state_sweep(cfg)?;
            out.unconverged = rows.iter().filter(|r| !r.sol.converged).count();
            out.tables.push(("ground_state.csv".into(), compute::ground_state_table(&rows)));
        }
        Command::Dynamics => {
            let init = cfg.dynamics.init;
            let runs: Vec<_> = grid_pairs(cfg)
                .par_iter()
                .map(|&(a, x)| compute::dynamics_run(cfg, a, x, init).map(|r| (a, x, r)))
                .collect::<Result<_, _>>()?;
            for (a, x, run) in runs {
                let curve = format!("dynamics_alpha{}_x{}_{}", tag(a), tag(x), init.label());
                out.derived.push((format!("{curve}.delta_r"), run.setup.two.delta_r));
                out.derived.push((format!("{curve}.max_norm_drift"), run.trajectory.max_norm_drift));
                out.tables.push((format!("{curve}.csv"), compute::dynamics_table(&run.trajectory)));
            }
        }
        Command::Dde => {
            let init = cfg.dde.init;
            let runs: Vec<_> = grid_pairs(cfg)
                .par_iter()
                .map(|&(a, x)| compute::dde_run(cfg, a, x, init).map(|r| (a, x, r)))
                .collect::<Result<_, _>>()?;
            for (a, x, run) in runs {
                let curve = format!("dde_alpha{}_x{}_{}", tag(a), tag(x), init.label());
                let s = &run.system;
                out.summary.push(format!("{curve}:"));
                out.summary.push(format!("  gamma      {}", num(s.gamma)));
                out.summary.push(format!("  tau        {}", num(s.tau)));
                out.summary.push(format!("  phase mod  {}", num(s.phase_mod())));
                match &run.steady {
                    Some(st) => {
                        out.summary.push(format!("  |c1(inf)|  {}", num(st.amplitude)));
                        out.summary.push(format!("  sz(inf)    {}", num(st.magnetization)));
                        out.summary.push(format!("  resonance  {:?}", st.convention));
                    }
                    None => out.summary.push("  steady state: off resonance, no closed form".into()),
                }
                out.derived.push((format!("{curve}.gamma"), s.gamma));
                out.tables.push((format!("{curve}.csv"), compute::dde_table(&run)));
            }
        }
        Command::Oracle => {
            let p = cfg.oracle.n_ph_max;
            for &n in &cfg.oracle.n_modes {
                let rows = compute::oracle_sweep(cfg, n, p)?;
                let violations = rows.iter().filter(|r| r.gap() > 1e-10).count();
                out.summary.push(format!("{n} modes, n_ph_max {p}: {} points, {violations} bound violations", rows.len()));
                out.tables.push((format!("oracle_modes{n}_nph{p}.csv"), compute::oracle_table(&rows)));
            }
        }
        Command::Recipe(r) => {
            let o = run_recipe(r, cfg)?;
            out.tables = o.tables;
            out.derived = o.derived;
            out.unconverged = o.unconverged;
        }
    }
    Ok(out)
}

/// Computes everything first, then writes each file atomically and the
/// manifest last.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Report, RunError> {
    ensure_writable(&cfg.output)?;
    let out = compute(cmd, cfg)?;
    let writer = Writer::new(&cfg.output);
    let mut report = Report { summary: out.summary, ..Report::default() };
    let mut files = vec![];
    for (name, table) in &out.tables {
        report.files.push(writer.write_table(name, table)?);
        files.push(FileEntry { name: name.clone(), rows: table.rows.len() });
    }
    let manifest = Manifest {
        tool: "wqed",
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        config: cfg,
        derived: out.derived,
        files,
    };
    report.files.push(writer.write_text(&format!("{}_manifest.json", cmd.name()), &manifest.to_json())?);
    if out.unconverged > 0 {
        report.failure = Some(format!("{} points did not converge", out.unconverged));
    }
    Ok(report)
}
