//! Configuration, subcommands and check orchestration behind the `iac` binary.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::Context;
pub use config::{Job, RunConfig};
pub use error::CliError;
