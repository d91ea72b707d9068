use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wqed_cli::config::{Grid, Init, RawConfig};
use wqed_cli::recipe::Recipe;
use wqed_cli::{execute, validate_config, Command, RunError};

/// Ground states, single-excitation dynamics and delay models for two emitters
/// on an Ohmic waveguide. Results are written as CSV.
#[derive(Parser, Debug)]
#[command(name = "wqed", version)]
struct Cli {
    /// JSON configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Default)]
struct Physics {
    /// Coupling: a value, a comma list, or start:stop:count.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    /// Emitter separation, same forms as --alpha.
    #[arg(long = "x-sep", allow_negative_numbers = true)]
    x_sep: Option<String>,
    /// Bare emitter splitting.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// `alpha=a0:a1:n` or `x=x0:x1:n`.
    #[arg(long)]
    sweep: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InitArg {
    Sym,
    Antisym,
    Eg,
}

impl From<InitArg> for Init {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Sym => Init::Sym,
            InitArg::Antisym => Init::Antisym,
            InitArg::Eg => Init::Eg,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Binned spectral function of the discretized line.
    Spectral {
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Two-emitter polaron ground states over an (alpha, x) grid.
    GroundState {
        #[command(flatten)]
        physics: Physics,
    },
    /// Single-excitation dynamics in the polaron frame.
    Dynamics {
        #[command(flatten)]
        physics: Physics,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Delay-differential model with its steady state.
    Dde {
        #[command(flatten)]
        physics: Physics,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Exact diagonalization on a few modes against the polaron energy.
    Oracle {
        #[command(flatten)]
        physics: Physics,
        #[arg(long = "n-modes", value_delimiter = ',')]
        n_modes: Option<Vec<usize>>,
        #[arg(long = "n-ph-max")]
        n_ph_max: Option<usize>,
    },
    /// Run a canned sweep: fig1a, fig2 .. fig8.
    Recipe { name: String },
}

fn grid(s: &str) -> Result<Grid, String> {
    Grid::parse(s)
}

fn apply_physics(raw: &mut RawConfig, p: &Physics) -> Result<(), String> {
    if let Some(a) = &p.alpha {
        raw.alpha = Some(grid(a)?);
    }
    if let Some(x) = &p.x_sep {
        raw.x_sep = Some(grid(x)?);
        raw.x_cells = None;
    }
    if let Some(d) = p.delta {
        raw.delta = Some(d);
    }
    for s in &p.sweep {
        let (key, range) = s.split_once('=').ok_or_else(|| format!("--sweep `{s}` must read key=start:stop:count"))?;
        let g = Grid::Sweep(range.to_string());
        match key {
            "alpha" => raw.alpha = Some(g),
            "x" => {
                raw.x_sep = Some(g);
                raw.x_cells = None;
            }
            other => return Err(format!("--sweep key `{other}` is not one of alpha, x")),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), RunError> {
    let config_error = |m: String| RunError::Config(wqed_cli::config::ConfigError::Invalid { field: "argv".into(), reason: m });
    let mut raw = match &cli.config {
        Some(p) => RawConfig::from_path(p)?,
        None => RawConfig::default(),
    };
    if let Some(out) = &cli.out {
        raw.output = Some(out.clone());
    }
    let cmd = match &cli.command {
        Cmd::Spectral { alpha, bins } => {
            if let Some(a) = alpha {
                raw.alpha = Some(grid(a).map_err(config_error)?);
            }
            if bins.is_some() {
                raw.spectral.bins = *bins;
            }
            Command::Spectral
        }
        Cmd::GroundState { physics } => {
            apply_physics(&mut raw, physics).map_err(config_error)?;
            Command::GroundState
        }
        Cmd::Dynamics { physics, init, t_max, dt, stride } => {
            apply_physics(&mut raw, physics).map_err(config_error)?;
            let d = &mut raw.dynamics;
            d.init = init.map(Init::from).or(d.init);
            d.t_max = t_max.or(d.t_max);
            d.dt = dt.or(d.dt);
            d.stride = stride.or(d.stride);
            Command::Dynamics
        }
        Cmd::Dde { physics, init, t_max, dt } => {
            apply_physics(&mut raw, physics).map_err(config_error)?;
            let d = &mut raw.dde;
            d.init = init.map(Init::from).or(d.init);
            d.t_max = t_max.or(d.t_max);
            d.dt = dt.or(d.dt);
            Command::Dde
        }
        Cmd::Oracle { physics, n_modes, n_ph_max } => {
            apply_physics(&mut raw, physics).map_err(config_error)?;
            if n_modes.is_some() {
                raw.oracle.n_modes = n_modes.clone();
            }
            raw.oracle.n_ph_max = n_ph_max.or(raw.oracle.n_ph_max);
            Command::Oracle
        }
        Cmd::Recipe { name } => Command::Recipe(name.parse::<Recipe>().map_err(config_error)?),
    };
    let cfg = validate_config(&raw, &cmd.defaults())?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(format!("--threads: {e}")))?;
    }
    let report = execute(cmd, &cfg)?;
    for line in &report.summary {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    match report.failure {
        Some(msg) => Err(RunError::Numerical(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<(), RunError> {
        run(Cli::try_parse_from(std::iter::once("wqed").chain(args.iter().copied())).unwrap())
    }

    #[test]
    fn spectral_writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        run_args(&["--out", out, "spectral", "--alpha", "0.1,0.2", "--bins", "20"]).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("spectral_alpha0.1.csv")).unwrap();
        assert!(csv.starts_with("omega,J_binned,J_analytic\n"));
        assert_eq!(csv.lines().count(), 21);
        assert!(dir.path().join("spectral_alpha0.2.csv").exists());
        let manifest = std::fs::read_to_string(dir.path().join("spectral_manifest.json")).unwrap();
        let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        assert_eq!(json["command"], "spectral");
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"alpha": 0.1, "solver": {"tol": 1e-10, "mystery": 1}}"#).unwrap();
        let err = run_args(&["--config", cfg.to_str().unwrap(), "ground-state"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn bad_arguments_exit_with_code_two() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        for args in [
            &["--out", out, "recipe", "fig9"][..],
            &["--out", out, "ground-state", "--sweep", "delta=0:1:3"],
            &["--out", out, "ground-state", "--alpha", "-0.1"],
            &["--out", out, "dde", "--init", "eg"],
        ] {
            let err = run_args(args).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
        }
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }
}
