//! Command-line front end: dataset ingestion, configuration and the
//! `fit`, `test` and `simulate` commands.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod output;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
