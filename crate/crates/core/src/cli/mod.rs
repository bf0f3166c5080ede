//! Config-driven commands behind the `frontfix` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_check, cmd_equilibrium, cmd_mms, cmd_probe, cmd_solve, exit_code, Options};
pub use config::RunConfig;
