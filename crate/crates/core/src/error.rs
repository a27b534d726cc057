use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },

    #[error("duplicate sentence ({doc_id}, {sentence_id})")]
    DuplicateSentence { doc_id: String, sentence_id: u32 },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("class {class:?} has {count} member(s); stratification needs at least 2")]
    Unstratifiable { class: String, count: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("training diverged at epoch {epoch} (loss {loss}); reduce the learning rate")]
    Divergence { epoch: usize, loss: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("vocabulary hash mismatch: model expects {expected}, featurizer has {actual}")]
    VocabularyMismatch { expected: String, actual: String },

    #[error("Fleiss' kappa undefined: all ratings fall in a single category")]
    KappaUndefined,

    #[error("statistic undefined: {0}")]
    Undefined(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
