use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("segment id mismatch: {left} vs {right}")]
    SegmentMismatch { left: usize, right: usize },

    #[error("hypothesis {index} of segment {segment} has no feature `{feature}`")]
    MissingFeature {
        segment: usize,
        index: usize,
        feature: String,
    },

    #[error("length mismatch in {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("invalid span: {0}")]
    Span(String),

    #[error("subword alignment failed at subword {position}: {message}")]
    Alignment { position: usize, message: String },

    #[error("expected {expected} sentences, found {actual}")]
    SentenceCount { expected: usize, actual: usize },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }
}
