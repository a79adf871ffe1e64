//! Command line, configuration files and data outputs for `ntband-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;

pub use config::{CliOverrides, RunConfig};
pub use error::CliError;
