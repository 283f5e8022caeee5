use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed point: {0}")]
    MalformedPoint(String),
    #[error("malformed block: {0}")]
    MalformedBlock(String),
    #[error("unsupported intersection: {0}")]
    UnsupportedIntersection(String),
    #[error("unsupported comparison: {0}")]
    UnsupportedComparison(String),
    #[error("family is not closed")]
    NotClosed,
    #[error("not a generating set: {0}")]
    NotGenerating(String),
    #[error("family has no least generating set")]
    NoLgs,
    #[error("families are not comparable")]
    NotComparable,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("element cap of {cap} exceeded")]
    CapExceeded { cap: usize },
    #[error("depth {0} exceeds the oracle limit")]
    DepthTooLarge(usize),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undefined name `{0}`")]
    UndefinedName(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
