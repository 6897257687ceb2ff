use std::path::PathBuf;

use eband_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const SCHEMA: i32 = 3;
    pub const POLICY: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Schema(_) => exit::SCHEMA,
            CliError::Io { .. } => exit::IO,
            CliError::Core(e) => match e {
                CoreError::Domain(_) | CoreError::OutOfBand { .. } => exit::USAGE,
                CoreError::Config(_) | CoreError::InconsistentNumerology(_) => exit::SCHEMA,
                CoreError::Policy(_) | CoreError::Aggregation(_) => exit::POLICY,
                CoreError::DegenerateGeometry(_)
                | CoreError::NoConvergence { .. }
                | CoreError::Infeasible(_)
                | CoreError::Range(_) => exit::NUMERICAL,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
