//! Sweeps, figure recipes and CSV output for the waveguide polaron simulator.
//!
//! The binary `wqed` is a thin wrapper around [`commands::execute`].

pub mod commands;
pub mod compute;
pub mod config;
pub mod output;
pub mod recipe;

pub use commands::{execute, Command, Report};
pub use compute::RunError;
pub use config::{validate_config, Defaults, RawConfig, RunConfig};
