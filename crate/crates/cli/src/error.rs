use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_CERTIFICATION: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("initial data rejected: {0}")]
    InitialData(vicinal_core::Error),

    #[error("solver failed: {0}")]
    Solver(vicinal_core::Error),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("{}: malformed snapshot: {reason}", path.display())]
    Snapshot { path: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::InitialData(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Certification(_) | CliError::Snapshot { .. } => EXIT_CERTIFICATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// Sort a core error raised while running into initial-data or solver
/// failures.
pub fn classify(err: vicinal_core::Error) -> CliError {
    use vicinal_core::Error as E;
    match err.root() {
        E::Inadmissible { .. } | E::SpectralUnderresolved { .. } | E::InvalidParameter(_) | E::InvalidGrid(_)
            if !matches!(err, E::StepFailed { .. }) =>
        {
            CliError::InitialData(err)
        }
        _ => CliError::Solver(err),
    }
}
