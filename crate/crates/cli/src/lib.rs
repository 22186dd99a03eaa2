//! Command-line front end for the `eom_bias` simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, resolve, Cli, CommandKind, RunConfig};
pub use error::CliError;
pub use output::emit_csv;
