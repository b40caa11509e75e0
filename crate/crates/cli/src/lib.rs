//! Config-driven runner and acceptance harness behind the `lfl` binary.

pub mod acceptance;
pub mod commands;
pub mod config_file;
pub mod csv;
pub mod error;

pub use error::{CliError, CliResult};
