//! Configuration, orchestration and file formats for the `vicinal-flow`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

pub use commands::{cmd_run, cmd_sweep, cmd_verify, Check, RunSummary, VerifyOutcome};
pub use config::{parse_config, ConfigError, InitSpec, RunConfig};
pub use error::CliError;
