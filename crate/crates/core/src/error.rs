use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A swept value produced parameters that fail validation.
    #[error("sweep value {value}: {source}")]
    SweepValue {
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed graph dump at line {line}: {reason}")]
    GraphDump { line: usize, reason: String },

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
