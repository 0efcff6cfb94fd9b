use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed WAV container: {msg}")]
    MalformedContainer { path: PathBuf, msg: String },
    #[error("{path}: unsupported WAV encoding: {msg}")]
    UnsupportedEncoding { path: PathBuf, msg: String },
    #[error("{0}: no audio samples")]
    EmptyAudio(PathBuf),
    #[error("{path}:{line}: {msg}")]
    MalformedLine { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("{path}:{line}: non-finite value")]
    NonFiniteValue { path: PathBuf, line: usize },
    #[error("{path}:{line}: GAD-7 score {score} outside 0..=21")]
    ScoreOutOfRange { path: PathBuf, line: usize, score: i64 },
    #[error("{0}: no records")]
    EmptyFile(PathBuf),
    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(transparent)]
    Core(#[from] gadvoice_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for unreadable or
    /// invalid inputs, 4 for numeric failures during fitting or evaluation.
    pub fn exit_code(&self) -> i32 {
        use gadvoice_core::Error as C;
        match self {
            Error::Config { .. } => 2,
            Error::Core(C::InvalidSpec(_)) => 2,
            Error::Core(
                C::MissingId(_) | C::DuplicateId(_) | C::ScoreOutOfRange(_) | C::DimensionMismatch { .. } | C::SignalTooShort { .. },
            ) => 3,
            Error::Core(_) => 4,
            _ => 3,
        }
    }
}
