use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown bite `{0}`")]
    UnknownBite(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("stream too short for filtering: {len} samples, need more than {needed}")]
    StreamTooShort { len: usize, needed: usize },
    #[error("median filter order must be odd and positive, got {0}")]
    InvalidOrder(usize),

    #[error("no mouth micromovement in window sequence")]
    NoMouthEvent,
    #[error("no upward transport segment before mouth event")]
    EmptyTransport,
    #[error("bite slice contains no samples")]
    EmptyBite,
    #[error("no windows to aggregate")]
    NoWindows,

    #[error("empty feature matrix")]
    EmptyMatrix,
    #[error("solver did not converge: duality gap {gap:e} after {passes} passes")]
    NotConverged { gap: f64, passes: usize },
    #[error("empty training set")]
    EmptyTraining,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("leave-one-subject-out needs at least 2 subjects, got {0}")]
    TooFewSubjects(usize),
    #[error("usable bite sets have an empty intersection")]
    EmptyIntersection,
    #[error("model and baseline folds cover different bites")]
    MismatchedBiteSets,
    #[error("invalid synthetic profile: {0}")]
    InvalidProfile(String),
    #[error("no readable metrics reports in {dir}: {reason}")]
    NoReportsFound { dir: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.into())
        } else {
            Error::Io {
                path: path.into(),
                source,
            }
        }
    }
}
