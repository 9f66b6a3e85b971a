use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants fall into three groups that the command-line front end maps to
/// exit codes: usage problems, data problems, and numeric failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invariant violated: {message}: {}", ids.join(", "))]
    Invariant { message: String, ids: Vec<String> },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("{path}: every line was skipped ({skipped} lines with an empty side)")]
    AllLinesSkipped { path: PathBuf, skipped: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target text is empty")]
    EmptyTarget,

    #[error("anchor text is empty{}", segment.as_ref().map(|s| format!(" (segment {s})")).unwrap_or_default())]
    EmptyAnchor { segment: Option<String> },

    #[error("reference missing for segments: {}", segments.join(", "))]
    MissingReference { segments: Vec<String> },

    #[error("reference text is empty")]
    EmptyReference,

    #[error("no rank pairs to evaluate")]
    EmptyPairs,

    #[error("no training examples")]
    EmptyExamples,

    #[error("no score for segment {segment}, system {system}, metric {metric}")]
    MissingScore {
        segment: String,
        system: String,
        metric: String,
    },

    #[error("need at least {needed} systems with scores and judgments, found {found}")]
    InsufficientSystems { needed: usize, found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("judgments mix kinds {0} and {1}")]
    MixedKinds(String, String),

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
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

    pub(crate) fn invariant(message: impl Into<String>, ids: Vec<String>) -> Self {
        Error::Invariant {
            message: message.into(),
            ids,
        }
    }

    /// Whether the error is a usage problem (bad arguments) rather than bad data
    /// or a numeric failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidArgument(_))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}
