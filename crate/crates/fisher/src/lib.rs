//! Command-line driver for `fisher-core`: distribution specs, subcommands,
//! JSON/CSV/table output and the reproduction report.

pub mod cli;
pub mod commands;
pub mod error;
pub mod model;
pub mod output;
pub mod reproduce;

pub use error::{CliError, CliResult};
pub use model::AnyModel;
