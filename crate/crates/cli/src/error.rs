use std::path::PathBuf;

use persuasion_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("missing artifact {path}: {hint}")]
    MissingArtifact { path: PathBuf, hint: &'static str },
    #[error("config: {0}")]
    Config(String),
}

pub type CliResult<T> = Result<T, CliError>;

/// Process exit codes, one per error class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitStatus {
    Ok = 0,
    /// Argument parsing errors (clap's own code).
    Usage = 2,
    Config = 3,
    MissingArtifact = 4,
    Io = 5,
    InvalidInput = 6,
    Unstratifiable = 7,
    Divergence = 8,
    ModelMismatch = 9,
    Undefined = 10,
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::MissingArtifact { .. } => ExitStatus::MissingArtifact,
            CliError::Config(_) => ExitStatus::Config,
            CliError::Core(e) => match e {
                CoreError::Io { .. } => ExitStatus::Io,
                CoreError::Malformed { .. }
                | CoreError::UnknownLabel { .. }
                | CoreError::DuplicateSentence { .. }
                | CoreError::MissingColumn(_)
                | CoreError::Json(_)
                | CoreError::Csv(_) => ExitStatus::InvalidInput,
                CoreError::InvalidValue(_) => ExitStatus::Config,
                CoreError::Unstratifiable { .. } => ExitStatus::Unstratifiable,
                CoreError::Divergence { .. } | CoreError::NonFinite(_) => ExitStatus::Divergence,
                CoreError::ShapeMismatch { .. } | CoreError::VocabularyMismatch { .. } => ExitStatus::ModelMismatch,
                CoreError::KappaUndefined | CoreError::Undefined(_) | CoreError::Empty(_) => ExitStatus::Undefined,
            },
        }
    }
}
