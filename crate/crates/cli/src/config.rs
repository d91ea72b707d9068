//! Strict JSON configuration and its fully defaulted form.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wqed::polaron::SolverOptions;
use wqed::waveguide::{WaveguideConfig, WaveguideError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("`{0}` and `{1}` are mutually exclusive")]
    Conflict(&'static str, &'static str),
    #[error("waveguide: {0}")]
    Waveguide(#[from] WaveguideError),
    #[error("output directory {path} is not writable: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

/// A number, an explicit list, or a linear sweep `"start:stop:count"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    One(f64),
    Many(Vec<f64>),
    Sweep(String),
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            return Ok(Grid::Sweep(s.to_string()));
        }
        let values: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match values {
            Ok(v) if v.len() == 1 => Ok(Grid::One(v[0])),
            Ok(v) => Ok(Grid::Many(v)),
            Err(e) => Err(format!("`{s}`: {e}")),
        }
    }

    pub fn expand(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        let values = match self {
            Grid::One(v) => vec![*v],
            Grid::Many(v) => v.clone(),
            Grid::Sweep(s) => {
                let parts: Vec<&str> = s.split(':').collect();
                let bad = || invalid(field, format!("sweep `{s}` must read start:stop:count"));
                if parts.len() != 3 {
                    return Err(bad());
                }
                let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
                let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
                let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
                linspace(a, b, n)
            }
        };
        if values.is_empty() {
            return Err(invalid(field, "grid is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(field, format!("non-finite value {v}")));
        }
        Ok(values)
    }
}

/// `n` points from `a` to `b` inclusive; computed as `a + i (b - a) / (n - 1)`
/// so every run produces the same bits.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Sym,
    Antisym,
    Eg,
}

impl Init {
    pub fn label(self) -> &'static str {
        match self {
            Init::Sym => "sym",
            Init::Antisym => "antisym",
            Init::Eg => "eg",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDynamics {
    pub init: Option<Init>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub stride: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDde {
    pub init: Option<Init>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub n_modes: Option<Vec<usize>>,
    pub n_ph_max: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectral {
    pub bins: Option<usize>,
}

/// The document as written by the user. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub omega_c: Option<f64>,
    pub v_g: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<Grid>,
    /// Absolute separations.
    pub x_sep: Option<Grid>,
    /// Separations in units of the lattice spacing.
    pub x_cells: Option<Grid>,
    #[serde(default)]
    pub solver: RawSolver,
    #[serde(default)]
    pub dynamics: RawDynamics,
    #[serde(default)]
    pub dde: RawDde,
    #[serde(default)]
    pub oracle: RawOracle,
    #[serde(default)]
    pub spectral: RawSpectral,
    pub output: Option<PathBuf>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Length(f64),
    OmegaC(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    Absolute(Vec<f64>),
    Cells(Vec<f64>),
}

/// Values substituted for missing keys.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub n: usize,
    pub cutoff: Cutoff,
    pub v_g: f64,
    pub delta: f64,
    pub alpha: Vec<f64>,
    /// `None` means `2π v_g / delta`.
    pub separation: Option<Separation>,
    pub init: Init,
}

impl Defaults {
    /// Static sweeps: `N = 1001`, `omega_c = 1`, `delta = 0.2`, one cell apart.
    pub fn ground_state() -> Self {
        Self {
            n: 1001,
            cutoff: Cutoff::OmegaC(1.0),
            v_g: 1.0,
            delta: 0.2,
            alpha: vec![0.1],
            separation: Some(Separation::Cells(vec![1.0])),
            init: Init::Sym,
        }
    }

    /// Time evolution: `L = 40π`, `N = 1001`, `delta = 1`, `x = 2π v_g / delta`.
    pub fn dynamics() -> Self {
        Self {
            n: 1001,
            cutoff: Cutoff::Length(40.0 * PI),
            v_g: 1.0,
            delta: 1.0,
            alpha: vec![0.01],
            separation: None,
            init: Init::Sym,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsBlock {
    pub init: Init,
    pub dt: f64,
    pub t_max: f64,
    pub stride: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DdeBlock {
    pub init: Init,
    pub dt: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleBlock {
    pub n_modes: Vec<usize>,
    pub n_ph_max: usize,
}

/// Fully defaulted and checked configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub waveguide: WaveguideConfig,
    pub omega_c: f64,
    pub dx: f64,
    pub delta: f64,
    pub alpha: Vec<f64>,
    pub x_sep: Vec<f64>,
    pub solver: SolverOptions,
    pub dynamics: DynamicsBlock,
    pub dde: DdeBlock,
    pub oracle: OracleBlock,
    pub spectral_bins: usize,
    pub output: PathBuf,
    /// Keys that were filled in from defaults.
    pub defaulted: Vec<String>,
}

impl RunConfig {
    /// Waveguide with the given coupling.
    pub fn waveguide_at(&self, alpha: f64) -> WaveguideConfig {
        WaveguideConfig { alpha, ..self.waveguide }
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite (got {v})")))
    }
}

/// Records which keys fell back to a default.
#[derive(Debug, Default)]
struct Defaulted(Vec<String>);

impl Defaulted {
    fn or<T>(&mut self, key: &str, v: Option<T>, d: impl FnOnce() -> T) -> T {
        v.unwrap_or_else(|| {
            self.0.push(key.to_string());
            d()
        })
    }
}

/// Resolves every key, applying `defaults` where the document is silent.
pub fn validate_config(raw: &RawConfig, defaults: &Defaults) -> Result<RunConfig, ConfigError> {
    let mut seen = Defaulted::default();
    let n = seen.or("N", raw.n, || defaults.n);
    let v_g = positive("v_g", seen.or("v_g", raw.v_g, || defaults.v_g))?;
    let cutoff = match (raw.length, raw.omega_c) {
        (Some(_), Some(_)) => return Err(ConfigError::Conflict("L", "omega_c")),
        (Some(l), None) => Cutoff::Length(positive("L", l)?),
        (None, Some(w)) => Cutoff::OmegaC(positive("omega_c", w)?),
        (None, None) => seen.or("L", None, || defaults.cutoff),
    };
    let length = match cutoff {
        Cutoff::Length(l) => l,
        Cutoff::OmegaC(w) => v_g * n as f64 / w,
    };
    let delta = positive("delta", seen.or("delta", raw.delta, || defaults.delta))?;

    let alpha = match &raw.alpha {
        Some(g) => g.expand("alpha")?,
        None => seen.or("alpha", None, || defaults.alpha.clone()),
    };
    if let Some(a) = alpha.iter().find(|a| **a < 0.0) {
        return Err(invalid("alpha", format!("must be non-negative (got {a})")));
    }
    let waveguide = WaveguideConfig::new(n, length, v_g, alpha[0])?;
    let dx = waveguide.dx();

    let separation = match (&raw.x_sep, &raw.x_cells) {
        (Some(_), Some(_)) => return Err(ConfigError::Conflict("x_sep", "x_cells")),
        (Some(g), None) => Separation::Absolute(g.expand("x_sep")?),
        (None, Some(g)) => Separation::Cells(g.expand("x_cells")?),
        (None, None) => seen.or("x_sep", defaults.separation.clone(), || {
            Separation::Absolute(vec![2.0 * PI * v_g / delta])
        }),
    };
    let x_sep: Vec<f64> = match separation {
        Separation::Absolute(v) => v,
        Separation::Cells(v) => v.iter().map(|c| c * dx).collect(),
    };
    if let Some(x) = x_sep.iter().find(|x| **x < 0.0 || **x > length / 2.0) {
        return Err(invalid("x_sep", format!("must lie in [0, L/2 = {}] (got {x})", length / 2.0)));
    }

    let d = SolverOptions::default();
    let solver = SolverOptions {
        tol: seen.or("solver.tol", raw.solver.tol, || d.tol),
        max_iter: seen.or("solver.max_iter", raw.solver.max_iter, || d.max_iter),
        damping: seen.or("solver.damping", raw.solver.damping, || d.damping),
    };

    // Band top of the lattice dispersion; the integrator needs dt <= 0.1 / omega_max.
    let omega_max = 2.0 * waveguide.omega_c() * (waveguide.half_width() as f64 * PI / n as f64).sin();
    let x_max = x_sep.iter().copied().fold(0.0, f64::max);
    let horizon = 0.95 * (length - x_max) / v_g;

    let dyn_raw = &raw.dynamics;
    let dynamics = DynamicsBlock {
        init: seen.or("dynamics.init", dyn_raw.init, || defaults.init),
        dt: positive("dynamics.dt", seen.or("dynamics.dt", dyn_raw.dt, || 0.05 / omega_max))?,
        t_max: positive("dynamics.t_max", seen.or("dynamics.t_max", dyn_raw.t_max, || horizon))?,
        stride: seen.or("dynamics.stride", dyn_raw.stride, || 50),
        epsilon: seen.or("dynamics.epsilon", dyn_raw.epsilon, || 0.0),
    };
    if dynamics.stride == 0 {
        return Err(invalid("dynamics.stride", "must be positive"));
    }
    if dynamics.dt > 0.1 / omega_max {
        return Err(invalid("dynamics.dt", format!("must not exceed 0.1 / omega_max = {}", 0.1 / omega_max)));
    }

    let dde = DdeBlock {
        init: seen.or("dde.init", raw.dde.init, || match defaults.init {
            Init::Eg => Init::Sym,
            other => other,
        }),
        dt: positive("dde.dt", seen.or("dde.dt", raw.dde.dt, || 0.01))?,
        t_max: positive("dde.t_max", seen.or("dde.t_max", raw.dde.t_max, || horizon))?,
    };
    if dde.init == Init::Eg {
        return Err(invalid("dde.init", "must be `sym` or `antisym`"));
    }

    let oracle = OracleBlock {
        n_modes: seen.or("oracle.n_modes", raw.oracle.n_modes.clone(), || vec![5, 7, 9]),
        n_ph_max: seen.or("oracle.n_ph_max", raw.oracle.n_ph_max, || 2),
    };
    if oracle.n_modes.is_empty() {
        return Err(invalid("oracle.n_modes", "grid is empty"));
    }
    let spectral_bins = seen.or("spectral.bins", raw.spectral.bins, || 50);
    let output = seen.or("output", raw.output.clone(), || PathBuf::from("out"));

    Ok(RunConfig {
        omega_c: waveguide.omega_c(),
        waveguide,
        dx,
        delta,
        alpha,
        x_sep,
        solver,
        dynamics,
        dde,
        oracle,
        spectral_bins,
        output,
        defaulted: seen.0,
    })
}

/// Creates `dir` if needed and checks that a file can be placed in it.
pub fn ensure_writable(dir: &Path) -> Result<(), ConfigError> {
    let err = |source| ConfigError::Output { path: dir.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(err)?;
    let probe = dir.join(".wqed-write-probe");
    std::fs::write(&probe, b"").map_err(err)?;
    std::fs::remove_file(&probe).map_err(err)
}
