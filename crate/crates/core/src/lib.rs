//! Two emitters coupled to a ring waveguide in the ultrastrong regime.
//!
//! The crate covers the discrete mode set, the variational polaron ground
//! state, single-excitation dynamics in the polaron frame, the delay
//! differential model, and a truncated exact-diagonalization reference.

pub mod dde;
pub mod dynamics;
pub mod oracle;
pub mod polaron;
pub mod quadrature;
pub mod special;
pub mod waveguide;

pub use polaron::{solve_single, solve_two, PolaronSolution, SolverOptions};
pub use waveguide::{build_modes, ModeSet, WaveguideConfig};
