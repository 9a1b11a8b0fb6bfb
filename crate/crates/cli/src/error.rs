use std::path::PathBuf;

use degent_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Rejected input: flags, config file, table files, out-of-range parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computed result violated a checked invariant.
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_)
            | CoreError::InvalidLambda(_)
            | CoreError::UnknownLevelStructure(_)
            | CoreError::ModeOutOfRange { .. }
            | CoreError::BoundaryDecay { .. }
            | CoreError::NotEven(_)
            | CoreError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
