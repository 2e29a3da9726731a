use std::io;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("round count {rounds} out of range for {cipher} (max {max})")]
    RoundRange {
        cipher: &'static str,
        rounds: u32,
        max: u32,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("truncated {what}: expected {expected} {unit}, found {actual}")]
    Truncation {
        what: &'static str,
        unit: &'static str,
        expected: u64,
        actual: u64,
    },
    #[error("value out of range: {0}")]
    Range(String),
    #[error("alignment error: {predictions} predictions for {groups} groups")]
    Alignment { groups: u64, predictions: u64 },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("i/o error at byte offset {offset}: {source}")]
    IoAt {
        offset: u64,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn io_at(offset: u64) -> impl FnOnce(io::Error) -> Error {
        move |source| Error::IoAt { offset, source }
    }
}
