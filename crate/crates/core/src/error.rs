use thiserror::Error;

use crate::domain::SuitabilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position in source text, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },

    #[error("unknown proposition `{name}` at {pos}")]
    UnknownProposition { pos: Pos, name: String },

    #[error("unknown connective `{name}` at {pos}")]
    UnknownConnective { pos: Pos, name: String },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("no domain entry for {0}")]
    Unmapped(String),

    #[error("region {region} is not large enough for X")]
    NotLargeEnough { region: String },

    #[error("space N_{degree} has {count} members, over the cap of {cap}")]
    CapExceeded {
        degree: usize,
        count: String,
        cap: u64,
    },

    #[error("cardinality of N_{degree} is too large to represent")]
    CountOverflow { degree: usize },

    #[error("generator is not suitable: {0}")]
    Unsuitable(SuitabilityReport),

    #[error("oracle budget exceeded: {0}")]
    Budget(String),

    #[error("oracle cannot evaluate: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
