use std::io;

use thiserror::Error;

/// Failures surfaced by the command line, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    NotPositiveDefinite(ntband_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("{0}")]
    GridMismatch(String),

    #[error("{0}")]
    Core(ntband_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::GridMismatch(_) | CliError::Core(_) => 2,
            CliError::NotPositiveDefinite(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ntband_core::Error> for CliError {
    fn from(e: ntband_core::Error) -> Self {
        use ntband_core::Error as E;
        match e {
            E::NotPositiveDefinite { .. } => CliError::NotPositiveDefinite(e),
            E::GridMismatch(m) => CliError::GridMismatch(m),
            E::ConfigError(m) => CliError::Config(m),
            E::DimensionMismatch { .. } | E::InvalidCorrelation(_) | E::InvalidParameter(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Core(other),
        }
    }
}

/// Exit code when some ensemble paths went bankrupt.
pub const EXIT_BANKRUPT: i32 = 5;
