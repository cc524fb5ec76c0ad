use std::path::PathBuf;

/// Errors raised by the library.
///
/// Shape mismatches inside the raw linear-algebra kernels are programming
/// errors and panic; everything reachable from user input surfaces here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("gradient requested from a noisy pass cache")]
    NoisyCache,

    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },

    #[error("step called on a finished episode")]
    EpisodeFinished,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty series")]
    EmptySeries,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
