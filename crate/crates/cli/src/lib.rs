//! Subcommands of the `skysweep` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
pub use error::CliError;
