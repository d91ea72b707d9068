//! Discretized Ohmic transmission line: ring of `N` lumped cells with
//! periodic boundary conditions, its normal modes and their couplings to a
//! point-like emitter.

use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveguideError {
    #[error("mode count must be odd and at least 3 (got {0})")]
    EvenOrTooFewModes(usize),
    #[error("waveguide length must be positive and finite (got {0})")]
    BadLength(f64),
    #[error("group velocity must be positive and finite (got {0})")]
    BadGroupVelocity(f64),
    #[error("coupling alpha must be non-negative and finite (got {0})")]
    BadAlpha(f64),
    #[error("at least 10 spectral bins are required (got {0})")]
    TooFewBins(usize),
}

/// Geometry and coupling of the discretized line.
///
/// The cutoff is not stored: `omega_c = v_g * N / L` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideConfig {
    pub n_modes: usize,
    pub length: f64,
    pub v_g: f64,
    pub alpha: f64,
}

impl WaveguideConfig {
    pub fn new(n_modes: usize, length: f64, v_g: f64, alpha: f64) -> Result<Self, WaveguideError> {
        let cfg = Self { n_modes, length, v_g, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the config whose cutoff equals `omega_c`, i.e. `L = v_g N / omega_c`.
    pub fn with_cutoff(
        n_modes: usize,
        omega_c: f64,
        v_g: f64,
        alpha: f64,
    ) -> Result<Self, WaveguideError> {
        Self::new(n_modes, v_g * n_modes as f64 / omega_c, v_g, alpha)
    }

    pub fn validate(&self) -> Result<(), WaveguideError> {
        if self.n_modes < 3 || self.n_modes.is_multiple_of(2) {
            return Err(WaveguideError::EvenOrTooFewModes(self.n_modes));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(WaveguideError::BadLength(self.length));
        }
        if !(self.v_g > 0.0 && self.v_g.is_finite()) {
            return Err(WaveguideError::BadGroupVelocity(self.v_g));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(WaveguideError::BadAlpha(self.alpha));
        }
        Ok(())
    }

    /// Lattice spacing `L / N`.
    pub fn dx(&self) -> f64 {
        self.length / self.n_modes as f64
    }

    pub fn omega_c(&self) -> f64 {
        self.v_g * self.n_modes as f64 / self.length
    }

    /// `|g| = sqrt(pi alpha v_g)`, from `alpha = |g|^2 / (pi v_g)`.
    pub fn coupling_magnitude(&self) -> f64 {
        (PI * self.alpha * self.v_g).sqrt()
    }

    pub fn half_width(&self) -> i64 {
        ((self.n_modes - 1) / 2) as i64
    }
}

/// Normal modes of the ring, ordered by ascending mode index `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    config: WaveguideConfig,
    pub m: Vec<i64>,
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub g: Vec<f64>,
}

/// Builds the modes `k_m = 2 pi m / L`, `m = -(N-1)/2 ..= (N-1)/2`, with the
/// lattice dispersion and couplings `g_k = |g| sqrt(omega_k / 2L)`.
pub fn build_modes(cfg: &WaveguideConfig) -> Result<ModeSet, WaveguideError> {
    cfg.validate()?;
    let half = cfg.half_width();
    let dx = cfg.dx();
    let wc = cfg.omega_c();
    let g_abs = cfg.coupling_magnitude();
    let n = cfg.n_modes;

    let mut m = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for mi in -half..=half {
        // Frequencies and couplings are evaluated from |m| so that the
        // +m and -m entries are bit-identical.
        let ka = 2.0 * PI * mi.unsigned_abs() as f64 / cfg.length;
        // wc * sqrt(2 - 2 cos(k dx)) written without the cancellation near k = 0.
        let w = 2.0 * wc * (0.5 * ka * dx).sin();
        m.push(mi);
        k.push(if mi < 0 { -ka } else { ka });
        omega.push(w);
        g.push(g_abs * (w / (2.0 * cfg.length)).sqrt());
    }
    Ok(ModeSet { config: *cfg, m, k, omega, g })
}

impl ModeSet {
    pub fn config(&self) -> &WaveguideConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn omega_max(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }

    /// Restriction to the given mode indices (kept in ascending `m` order).
    pub fn subset(&self, indices: &[usize]) -> ModeSet {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_by_key(|&i| self.m[i]);
        idx.dedup();
        ModeSet {
            config: self.config,
            m: idx.iter().map(|&i| self.m[i]).collect(),
            k: idx.iter().map(|&i| self.k[i]).collect(),
            omega: idx.iter().map(|&i| self.omega[i]).collect(),
            g: idx.iter().map(|&i| self.g[i]).collect(),
        }
    }

    /// Position of mode index `m`, if present.
    pub fn index_of(&self, m: i64) -> Option<usize> {
        self.m.binary_search(&m).ok()
    }

    /// Hash of the mode arrays; two solutions computed on the same modes
    /// carry the same fingerprint.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.m.hash(&mut h);
        for arr in [&self.k, &self.omega, &self.g] {
            for v in arr.iter() {
                v.to_bits().hash(&mut h);
            }
        }
        self.config.length.to_bits().hash(&mut h);
        h.finish()
    }
}

/// Continuum Ohmic spectral density `J(omega) = pi alpha omega`.
pub fn spectral_function_analytic(omega: f64, alpha: f64) -> f64 {
    PI * alpha * omega
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBin {
    pub center: f64,
    pub width: f64,
    pub mode_count: usize,
    /// `None` when no mode falls in the bin.
    pub j_binned: Option<f64>,
    pub j_analytic: f64,
}

/// Histogram estimate `2 pi sum_{k in bin} g_k^2 / width` on `[0, omega_c]`.
pub fn spectral_function_reconstruct(
    modes: &ModeSet,
    n_bins: usize,
) -> Result<Vec<SpectralBin>, WaveguideError> {
    if n_bins < 10 {
        return Err(WaveguideError::TooFewBins(n_bins));
    }
    let wc = modes.config.omega_c();
    let alpha = modes.config.alpha;
    let width = wc / n_bins as f64;
    let mut weight = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for (&w, &g) in modes.omega.iter().zip(&modes.g) {
        if !(0.0..=wc).contains(&w) {
            continue;
        }
        let b = ((w / width) as usize).min(n_bins - 1);
        weight[b] += g * g;
        count[b] += 1;
    }
    Ok((0..n_bins)
        .map(|b| {
            let center = (b as f64 + 0.5) * width;
            SpectralBin {
                center,
                width,
                mode_count: count[b],
                j_binned: (count[b] > 0).then(|| 2.0 * PI * weight[b] / width),
                j_analytic: spectral_function_analytic(center, alpha),
            }
        })
        .collect())
}
