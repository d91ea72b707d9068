//! Figure-reproduction recipes: one CSV per curve.

use std::str::FromStr;

use rayon::prelude::*;
use wqed::dde::golden_rule_rate;
use wqed::polaron;

use crate::compute::{self, RunError};
use crate::config::{linspace, validate_config, Defaults, Init, RawConfig, RunConfig, Separation};
use crate::output::{num, opt, tag, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Fig1a,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "fig1a" => Recipe::Fig1a,
            "fig2" => Recipe::Fig2,
            "fig3" => Recipe::Fig3,
            "fig4" => Recipe::Fig4,
            "fig5" => Recipe::Fig5,
            "fig6" => Recipe::Fig6,
            "fig7" => Recipe::Fig7,
            "fig8" => Recipe::Fig8,
            _ => return Err(format!("unknown recipe `{s}` (expected fig1a, fig2 .. fig8)")),
        })
    }
}

impl Recipe {
    pub const ALL: [Recipe; 8] = [
        Recipe::Fig1a,
        Recipe::Fig2,
        Recipe::Fig3,
        Recipe::Fig4,
        Recipe::Fig5,
        Recipe::Fig6,
        Recipe::Fig7,
        Recipe::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig1a => "fig1a",
            Recipe::Fig2 => "fig2",
            Recipe::Fig3 => "fig3",
            Recipe::Fig4 => "fig4",
            Recipe::Fig5 => "fig5",
            Recipe::Fig6 => "fig6",
            Recipe::Fig7 => "fig7",
            Recipe::Fig8 => "fig8",
        }
    }

    /// Caption values used where the document is silent.
    pub fn defaults(self) -> Defaults {
        let mut d = match self {
            Recipe::Fig1a | Recipe::Fig2 | Recipe::Fig3 | Recipe::Fig4 => Defaults::ground_state(),
            _ => Defaults::dynamics(),
        };
        match self {
            Recipe::Fig1a => d.alpha = vec![0.1],
            Recipe::Fig2 => {
                d.alpha = vec![0.05, 0.1, 0.2];
                d.separation = Some(Separation::Cells(linspace(0.0, 40.0, 161)));
            }
            Recipe::Fig3 | Recipe::Fig4 => {
                d.alpha = linspace(0.0, 1.2, 121);
                d.separation = Some(Separation::Cells(vec![1.0, 2.0, 8.0, 500.0]));
            }
            _ => d.alpha = vec![0.01, 0.1, 0.5, 1.0],
        }
        if matches!(self, Recipe::Fig6 | Recipe::Fig8) {
            d.init = Init::Eg;
        }
        d
    }

    pub fn config(self, raw: &RawConfig) -> Result<RunConfig, RunError> {
        Ok(validate_config(raw, &self.defaults())?)
    }
}

#[derive(Debug, Default)]
pub struct RecipeOutput {
    /// `(file name, table)` in a fixed order.
    pub tables: Vec<(String, Table)>,
    /// `(key, value)` pairs recorded in the manifest.
    pub derived: Vec<(String, f64)>,
    /// Rows whose fixed point did not converge.
    pub unconverged: usize,
}

pub fn run_recipe(recipe: Recipe, cfg: &RunConfig) -> Result<RecipeOutput, RunError> {
    match recipe {
        Recipe::Fig1a => fig1a(cfg),
        Recipe::Fig2 => fig2(cfg),
        Recipe::Fig3 => fig3_fig4(cfg, false),
        Recipe::Fig4 => fig3_fig4(cfg, true),
        Recipe::Fig5 => magnetization(cfg, "fig5", &[Init::Sym, Init::Antisym]),
        Recipe::Fig6 => magnetization(cfg, "fig6", &[Init::Eg]),
        Recipe::Fig7 => decay_rates(cfg, "fig7", &[Init::Sym, Init::Antisym]),
        Recipe::Fig8 => decay_rates(cfg, "fig8", &[Init::Eg]),
    }
}

fn fig1a(cfg: &RunConfig) -> Result<RecipeOutput, RunError> {
    let mut out = RecipeOutput::default();
    for &a in &cfg.alpha {
        out.tables.push((format!("fig1a_alpha{}.csv", tag(a)), compute::spectral(cfg, a)?));
    }
    Ok(out)
}

pub const FIG2_HEADER: &[&str] = &["x_over_dx", "x", "ising_J", "ising_J_sinc", "ising_J_corrected", "delta_r"];

fn fig2(cfg: &RunConfig) -> Result<RecipeOutput, RunError> {
    let rows = compute::ground_state_sweep(cfg)?;
    let mut out = RecipeOutput::default();
    let (wc, v) = (cfg.omega_c, cfg.waveguide.v_g);
    for (i, &a) in cfg.alpha.iter().enumerate() {
        let mut t = Table::new(FIG2_HEADER);
        for r in &rows[i * cfg.x_sep.len()..(i + 1) * cfg.x_sep.len()] {
            out.unconverged += usize::from(!r.sol.converged);
            t.push(vec![
                num(r.x / cfg.dx),
                num(r.x),
                num(r.sol.ising_j),
                num(polaron::ising_sinc(a, wc, r.x, v)),
                num(polaron::ising_corrected(a, wc, r.x, v, r.sol.delta_r)),
                num(r.sol.delta_r),
            ]);
        }
        out.tables.push((format!("fig2_alpha{}.csv", tag(a)), t));
    }
    Ok(out)
}

/// Separation label in lattice cells, e.g. `x8`.
fn x_label(cfg: &RunConfig, x: f64) -> String {
    let cells = x / cfg.dx;
    let rounded = cells.round();
    if (cells - rounded).abs() < 1e-9 {
        format!("x{}", rounded as i64)
    } else {
        format!("x{}", tag(cells))
    }
}

pub const FIG3_HEADER: &[&str] = &["alpha", "delta_r_over_delta", "ising_J", "converged", "iterations"];
pub const FIG4_HEADER: &[&str] = &["alpha", "entropy", "magnetization", "delta_r_over_delta", "converged"];

fn fig3_fig4(cfg: &RunConfig, entropy: bool) -> Result<RecipeOutput, RunError> {
    let name = if entropy { "fig4" } else { "fig3" };
    let rows = compute::ground_state_sweep(cfg)?;
    let mut out = RecipeOutput::default();
    let n_x = cfg.x_sep.len();
    for (j, &x) in cfg.x_sep.iter().enumerate() {
        let mut t = Table::new(if entropy { FIG4_HEADER } else { FIG3_HEADER });
        for r in rows.iter().skip(j).step_by(n_x) {
            let s = &r.sol;
            out.unconverged += usize::from(!s.converged);
            t.push(if entropy {
                vec![num(r.alpha), num(r.entropy), num(r.magnetization), num(s.renormalization()), s.converged.to_string()]
            } else {
                vec![num(r.alpha), num(s.renormalization()), num(s.ising_j), s.converged.to_string(), s.iterations.to_string()]
            });
        }
        out.tables.push((format!("{name}_{}.csv", x_label(cfg, x)), t));
    }
    if !entropy {
        let singles: Vec<_> = cfg
            .alpha
            .par_iter()
            .map(|&a| {
                let modes = compute::modes_at(cfg, a)?;
                polaron::solve_single(cfg.delta, &modes, &cfg.solver)
                    .map_err(|e| RunError::Numerical(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let mut t = Table::new(FIG3_HEADER);
        for (s, &a) in singles.iter().zip(&cfg.alpha) {
            out.unconverged += usize::from(!s.converged);
            t.push(vec![num(a), num(s.renormalization()), num(0.0), s.converged.to_string(), s.iterations.to_string()]);
        }
        out.tables.push(("fig3_single.csv".to_string(), t));
    }
    Ok(out)
}

fn runs(cfg: &RunConfig, inits: &[Init]) -> Result<Vec<(f64, Init, compute::DynamicsRun)>, RunError> {
    let x = cfg.x_sep[0];
    let jobs: Vec<(f64, Init)> = cfg.alpha.iter().flat_map(|&a| inits.iter().map(move |&i| (a, i))).collect();
    jobs.par_iter().map(|&(a, i)| Ok((a, i, compute::dynamics_run(cfg, a, x, i)?))).collect()
}

fn record(out: &mut RecipeOutput, curve: &str, run: &compute::DynamicsRun) {
    let two = &run.setup.two;
    out.derived.push((format!("{curve}.delta_r"), two.delta_r));
    out.derived.push((format!("{curve}.ising_J"), two.ising_j));
    out.derived.push((format!("{curve}.theta"), two.theta));
    out.derived.push((format!("{curve}.max_norm_drift"), run.trajectory.max_norm_drift));
}

pub const MAGNETIZATION_HEADER: &[&str] = &["t", "sz1_lab", "sz2_lab", "sz1_pol_renorm", "sz2_pol_renorm"];

/// Lab-frame and polaron-frame magnetizations; the latter scaled by `delta_r / delta`.
fn magnetization(cfg: &RunConfig, name: &str, inits: &[Init]) -> Result<RecipeOutput, RunError> {
    let mut out = RecipeOutput::default();
    for (a, init, run) in runs(cfg, inits)? {
        let curve = format!("{name}_alpha{}_{}", tag(a), init.label());
        let r = run.setup.two.renormalization();
        let mut t = Table::new(MAGNETIZATION_HEADER);
        for s in &run.trajectory.samples {
            t.push(vec![num(s.t), num(s.sz_lab[0]), num(s.sz_lab[1]), num(r * s.sz_pol[0]), num(r * s.sz_pol[1])]);
        }
        record(&mut out, &curve, &run);
        out.tables.push((format!("{curve}.csv"), t));
    }
    Ok(out)
}

pub const DECAY_HEADER: &[&str] = &["t", "gamma1", "gamma2", "gamma_ref"];

/// Instantaneous decay rates with the golden-rule reference `π α delta_r`.
fn decay_rates(cfg: &RunConfig, name: &str, inits: &[Init]) -> Result<RecipeOutput, RunError> {
    let mut out = RecipeOutput::default();
    for (a, init, run) in runs(cfg, inits)? {
        let curve = format!("{name}_alpha{}_{}", tag(a), init.label());
        let reference = golden_rule_rate(a, run.setup.two.delta_r);
        let mut t = Table::new(DECAY_HEADER);
        for s in &run.trajectory.samples {
            t.push(vec![num(s.t), opt(s.gamma[0]), opt(s.gamma[1]), num(reference)]);
        }
        record(&mut out, &curve, &run);
        out.derived.push((format!("{curve}.gamma_ref"), reference));
        out.tables.push((format!("{curve}.csv"), t));
    }
    Ok(out)
}
