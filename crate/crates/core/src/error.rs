use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed line in one of the text formats (database, tree, forest,
/// a/an rules, gold sidecar).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError { line, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.field, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("entropy of an empty distribution is undefined")]
    EmptyDistribution,
    #[error("feature counts ({feature_the}, {feature_a_an}) exceed node counts ({node_the}, {node_a_an})")]
    FeatureExceedsNode { node_the: u64, node_a_an: u64, feature_the: u64, feature_a_an: u64 },
    #[error("length mismatch: {predictions} predictions for {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
