//! Exact diagonalization of the truncated spin-boson Hamiltonian
//!
//! ```text
//! H = (Δ/2) sum_j σz_j + sum_k ω_k a_k† a_k
//!     + sum_j σx_j sum_k g_k (a_k e^{ik x_j} + a_k† e^{-ik x_j})
//! ```
//!
//! on a handful of modes with a cap on the total photon number. Used as an
//! independent reference for the variational energies and weak-coupling
//! dynamics.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::waveguide::ModeSet;

/// Largest Hilbert-space dimension accepted.
pub const MAX_DIMENSION: usize = 200_000;
/// Top-shell population above which a propagation is flagged untrusted.
pub const LEAKAGE_LIMIT: f64 = 1e-3;
pub const MAX_ORACLE_MODES: usize = 9;
pub const MAX_PHOTONS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("mode count {0} outside 2..=9")]
    BadModeCount(usize),
    #[error("only {available} modes available, {requested} requested")]
    NotEnoughModes { requested: usize, available: usize },
    #[error("photon cutoff {0} outside 1..=3")]
    BadPhotonCutoff(usize),
    #[error("one or two emitters supported (got {0})")]
    BadQubitCount(usize),
    #[error("Hilbert space dimension {0} exceeds the limit")]
    TooLarge(usize),
    #[error("state has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("displacement array has length {got}, expected {expected}")]
    DisplacementLength { got: usize, expected: usize },
    #[error("ground state has no definite parity (<Π> = {0})")]
    IndefiniteParity(f64),
    #[error("time step and end time must be positive and finite")]
    BadTime,
}

/// Picks `n_modes` indices of `modes`: the `k = 0` mode when `n_modes` is odd,
/// the lowest `±k` pair, then the pairs closest in frequency to `delta`.
/// Indices are returned in ascending `m`.
pub fn select_oracle_modes(modes: &ModeSet, n_modes: usize, delta: f64) -> Result<Vec<usize>, OracleError> {
    if !(2..=MAX_ORACLE_MODES).contains(&n_modes) {
        return Err(OracleError::BadModeCount(n_modes));
    }
    if n_modes > modes.len() {
        return Err(OracleError::NotEnoughModes { requested: n_modes, available: modes.len() });
    }
    let mut picked = Vec::with_capacity(n_modes);
    if n_modes % 2 == 1 {
        picked.push(modes.index_of(0).expect("mode sets always contain m = 0"));
    }
    let half = modes.config().half_width();
    let mut pairs: Vec<i64> = (2..=half).collect();
    pairs.sort_by(|&a, &b| {
        let da = (modes.omega[modes.index_of(a).unwrap()] - delta).abs();
        let db = (modes.omega[modes.index_of(b).unwrap()] - delta).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    for m in std::iter::once(1).chain(pairs).take(n_modes / 2) {
        picked.push(modes.index_of(m).unwrap());
        picked.push(modes.index_of(-m).unwrap());
    }
    picked.sort_by_key(|&i| modes.m[i]);
    Ok(picked)
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns aligned with `values`.
    pub vectors: DMatrix<Complex64>,
}

#[derive(Debug)]
pub struct OracleModel {
    pub n_qubits: usize,
    pub delta: f64,
    pub positions: Vec<f64>,
    pub n_ph_max: usize,
    /// Coupled modes only; uncoupled modes carry no dynamics and are dropped.
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub g: Vec<f64>,
    /// Occupation vectors with total photon number at most `n_ph_max`.
    pub fock: Vec<Vec<u8>>,
    pub hamiltonian: DMatrix<Complex64>,
    spectrum: OnceLock<Spectrum>,
}

fn fock_basis(n_modes: usize, n_max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; n_modes]];
    let mut frontier = out.clone();
    for _ in 0..n_max {
        let mut next = Vec::new();
        for occ in &frontier {
            // Only raise modes at or after the last occupied one to avoid repeats.
            let start = occ.iter().rposition(|&n| n > 0).unwrap_or(0);
            for k in start..n_modes {
                let mut o = occ.clone();
                o[k] += 1;
                next.push(o);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl OracleModel {
    /// Builds the model on all coupled modes of `modes`.
    ///
    /// One emitter sits at `L/2`; two sit at `L/2 ∓ x/2`.
    pub fn build(
        modes: &ModeSet,
        delta: f64,
        n_qubits: usize,
        x_sep: f64,
        n_ph_max: usize,
    ) -> Result<Self, OracleError> {
        if !(1..=2).contains(&n_qubits) {
            return Err(OracleError::BadQubitCount(n_qubits));
        }
        if !(1..=MAX_PHOTONS).contains(&n_ph_max) {
            return Err(OracleError::BadPhotonCutoff(n_ph_max));
        }
        let active: Vec<usize> = (0..modes.len()).filter(|&i| modes.g[i] != 0.0).collect();
        if active.len() > MAX_ORACLE_MODES {
            return Err(OracleError::BadModeCount(active.len()));
        }
        let n_fock = binomial(active.len() + n_ph_max, n_ph_max);
        let dim = (1 << n_qubits) * n_fock;
        if dim > MAX_DIMENSION {
            return Err(OracleError::TooLarge(dim));
        }
        let half = 0.5 * modes.config().length;
        let positions = if n_qubits == 1 { vec![half] } else { vec![half - 0.5 * x_sep, half + 0.5 * x_sep] };
        let k: Vec<f64> = active.iter().map(|&i| modes.k[i]).collect();
        let omega: Vec<f64> = active.iter().map(|&i| modes.omega[i]).collect();
        let g: Vec<f64> = active.iter().map(|&i| modes.g[i]).collect();
        let fock = fock_basis(k.len(), n_ph_max);
        debug_assert_eq!(fock.len(), n_fock);

        let mut model = Self {
            n_qubits,
            delta,
            positions,
            n_ph_max,
            k,
            omega,
            g,
            fock,
            hamiltonian: DMatrix::zeros(dim, dim),
            spectrum: OnceLock::new(),
        };
        let g = model.g.clone();
        model.hamiltonian = model.coupling_operator(&g, 1.0, false);
        for s in 0..(1 << n_qubits) {
            let spin: f64 = (0..n_qubits).map(|j| if s >> j & 1 == 1 { 0.5 } else { -0.5 }).sum();
            for (fi, occ) in model.fock.iter().enumerate() {
                let photons: f64 = occ.iter().zip(&model.omega).map(|(&n, &w)| n as f64 * w).sum();
                let idx = model.index(s, fi);
                model.hamiltonian[(idx, idx)] += Complex64::new(delta * spin + photons, 0.0);
            }
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn n_fock(&self) -> usize {
        self.fock.len()
    }

    fn index(&self, spin: usize, fock: usize) -> usize {
        spin * self.fock.len() + fock
    }

    /// Raising part `scale sum_j σx_j sum_k w_k a_k† e^{-ik x_j}` plus its
    /// adjoint, or minus its adjoint when `anti` (anti-Hermitian generator).
    fn coupling_operator(&self, weights: &[f64], scale: f64, anti: bool) -> DMatrix<Complex64> {
        let dim = self.dim();
        let n_fock = self.fock.len();
        let lookup: HashMap<&[u8], usize> = self.fock.iter().enumerate().map(|(i, o)| (o.as_slice(), i)).collect();
        let mut m = DMatrix::zeros(dim, dim);
        let mut raised = Vec::with_capacity(self.k.len());
        for (fi, occ) in self.fock.iter().enumerate() {
            let total: usize = occ.iter().map(|&n| n as usize).sum();
            if total == self.n_ph_max {
                continue;
            }
            raised.clear();
            for kk in 0..self.k.len() {
                let mut o = occ.clone();
                o[kk] += 1;
                raised.push((kk, lookup[o.as_slice()], (occ[kk] as f64 + 1.0).sqrt()));
            }
            for s in 0..(1usize << self.n_qubits) {
                let src = s * n_fock + fi;
                for (j, &xj) in self.positions.iter().enumerate() {
                    let flipped = s ^ (1 << j);
                    for &(kk, fj, amp) in &raised {
                        let dst = flipped * n_fock + fj;
                        let v = Complex64::from_polar(scale * weights[kk] * amp, -self.k[kk] * xj);
                        m[(dst, src)] += v;
                        m[(src, dst)] += if anti { -v.conj() } else { v.conj() };
                    }
                }
            }
        }
        m
    }

    /// Eigen-decomposition, computed once.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| hermitian_spectrum(self.hamiltonian.clone()))
    }

    /// `<σz_j>` for each emitter.
    pub fn sigma_z(&self, psi: &DVector<Complex64>) -> Vec<f64> {
        let n_fock = self.fock.len();
        (0..self.n_qubits)
            .map(|j| {
                (0..self.dim())
                    .map(|i| {
                        let s = i / n_fock;
                        let sign = if s >> j & 1 == 1 { 1.0 } else { -1.0 };
                        sign * psi[i].norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }

    /// `<σz_1 σz_2 (-1)^{N_photons}>` (for one emitter, `<σz (-1)^N>`).
    pub fn parity(&self, psi: &DVector<Complex64>) -> f64 {
        let n_fock = self.fock.len();
        (0..self.dim())
            .map(|i| {
                let (s, fi) = (i / n_fock, i % n_fock);
                let spins: i32 = (0..self.n_qubits).map(|j| if s >> j & 1 == 1 { 1 } else { -1 }).product();
                let photons: usize = self.fock[fi].iter().map(|&n| n as usize).sum();
                let sign = spins * if photons.is_multiple_of(2) { 1 } else { -1 };
                sign as f64 * psi[i].norm_sqr()
            })
            .sum()
    }

    /// Population of states with exactly `n_ph_max` photons.
    pub fn top_shell_population(&self, psi: &DVector<Complex64>) -> f64 {
        let n_fock = self.fock.len();
        (0..self.dim())
            .filter(|&i| self.fock[i % n_fock].iter().map(|&n| n as usize).sum::<usize>() == self.n_ph_max)
            .map(|i| psi[i].norm_sqr())
            .sum()
    }

    /// Emitter reduced density matrix, basis index bit `j` set = emitter `j` excited.
    pub fn reduced_density_matrix(&self, psi: &DVector<Complex64>) -> DMatrix<Complex64> {
        let n_fock = self.fock.len();
        let ns = 1 << self.n_qubits;
        let m = DMatrix::from_fn(ns, n_fock, |s, f| psi[s * n_fock + f]);
        &m * m.adjoint()
    }

    /// `U_P (sum_i c_i σx_i)(cos θ |g..g> + sin θ |e..e>) |0>` with
    /// `U_P = exp(-sum_j σx_j sum_k f_k (a_k† e^{-ik x_j} - a_k e^{ik x_j}))`.
    ///
    /// The spin part is renormalized, since `σx_1` and `σx_2` acting on the
    /// dressed ground state overlap by `sin 2θ`. `f` is indexed like the coupled
    /// modes of the model. For one emitter `theta` is ignored.
    pub fn polaron_initial_state(
        &self,
        f: &[f64],
        c: &[Complex64],
        theta: f64,
    ) -> Result<DVector<Complex64>, OracleError> {
        if f.len() != self.k.len() {
            return Err(OracleError::DisplacementLength { got: f.len(), expected: self.k.len() });
        }
        if c.len() != self.n_qubits {
            return Err(OracleError::LengthMismatch { got: c.len(), expected: self.n_qubits });
        }
        let vac = self.fock.iter().position(|o| o.iter().all(|&n| n == 0)).unwrap();
        let mut psi = DVector::zeros(self.dim());
        if self.n_qubits == 1 {
            psi[self.index(1, vac)] = c[0];
        } else {
            let (ct, st) = (theta.cos(), theta.sin());
            // σx_1 flips bit 0, σx_2 flips bit 1: |gg> -> |eg>/|ge>, |ee> -> |ge>/|eg>.
            psi[self.index(0b01, vac)] += c[0] * ct + c[1] * st;
            psi[self.index(0b10, vac)] += c[1] * ct + c[0] * st;
            let n = psi.norm();
            if n > 0.0 {
                psi /= Complex64::new(n, 0.0);
            }
        }
        // Generator A is anti-Hermitian; exp(A) = W exp(-i D) W† with iA = W D W†.
        let a = self.coupling_operator(f, -1.0, true);
        let ia = a * Complex64::new(0.0, 1.0);
        let sp = hermitian_spectrum(ia);
        let phases = DVector::from_iterator(sp.values.len(), sp.values.iter().map(|&d| Complex64::from_polar(1.0, -d)));
        let coeff = sp.vectors.adjoint() * psi;
        Ok(&sp.vectors * coeff.component_mul(&phases))
    }
}

fn hermitian_spectrum(h: DMatrix<Complex64>) -> Spectrum {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum { values, vectors }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: DVector<Complex64>,
    pub reduced_density_matrix: DMatrix<Complex64>,
    /// `+1` or `-1`.
    pub parity: i8,
}

/// Lowest eigenpair with its emitter density matrix and parity.
pub fn exact_ground(model: &OracleModel) -> Result<GroundState, OracleError> {
    let sp = model.spectrum();
    let state = sp.vectors.column(0).into_owned();
    let p = model.parity(&state);
    if (p.abs() - 1.0).abs() > 1e-8 {
        return Err(OracleError::IndefiniteParity(p));
    }
    Ok(GroundState {
        energy: sp.values[0],
        reduced_density_matrix: model.reduced_density_matrix(&state),
        state,
        parity: if p > 0.0 { 1 } else { -1 },
    })
}

#[derive(Debug, Clone)]
pub struct OracleTrajectory {
    pub t: Vec<f64>,
    /// `<σz_j>` per sample.
    pub sigma_z: Vec<Vec<f64>>,
    pub max_norm_error: f64,
    pub max_leakage: f64,
    /// False once the top photon shell exceeded the leakage limit.
    pub trusted: bool,
}

/// Spectral propagation `V e^{-iΛt} V† psi0` sampled every `dt` up to `t_max`.
pub fn exact_evolve(
    model: &OracleModel,
    psi0: &DVector<Complex64>,
    dt: f64,
    t_max: f64,
) -> Result<OracleTrajectory, OracleError> {
    if psi0.len() != model.dim() {
        return Err(OracleError::LengthMismatch { got: psi0.len(), expected: model.dim() });
    }
    if !(dt > 0.0 && dt.is_finite() && t_max >= 0.0 && t_max.is_finite()) {
        return Err(OracleError::BadTime);
    }
    let sp = model.spectrum();
    let coeff = sp.vectors.adjoint() * psi0;
    let norm0 = psi0.norm_squared();
    let steps = (t_max / dt).round() as usize;
    let mut out = OracleTrajectory { t: vec![], sigma_z: vec![], max_norm_error: 0.0, max_leakage: 0.0, trusted: true };
    for n in 0..=steps {
        let t = n as f64 * dt;
        let rot = DVector::from_iterator(
            coeff.len(),
            sp.values.iter().zip(coeff.iter()).map(|(&e, &c)| c * Complex64::from_polar(1.0, -e * t)),
        );
        let psi = &sp.vectors * rot;
        out.max_norm_error = out.max_norm_error.max((psi.norm_squared() - norm0).abs());
        let leak = model.top_shell_population(&psi);
        out.max_leakage = out.max_leakage.max(leak);
        out.t.push(t);
        out.sigma_z.push(model.sigma_z(&psi));
    }
    out.trusted = out.max_leakage <= LEAKAGE_LIMIT;
    Ok(out)
}
