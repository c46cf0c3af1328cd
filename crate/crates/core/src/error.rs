use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("{what} index {index} out of range (allowed 0..={max})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("malformed term: {0}")]
    MalformedTerm(String),

    #[error("not purely co-simplicial: {0}")]
    NotCoSimplicial(String),

    #[error("coproduct of {0} requires completed tensor product")]
    CompletionRequired(String),

    #[error("derivative of order {order} unavailable for {function}")]
    DerivativeUnavailable { function: String, order: usize },

    #[error("evaluation at a pole of {0}")]
    Pole(String),

    #[error("exact evaluation unsupported for {0}")]
    NotExact(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
