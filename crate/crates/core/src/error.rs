use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not symmetric: entry ({alpha},{beta}) = {forward} but ({beta},{alpha}) = {backward}")]
    Asymmetric {
        alpha: usize,
        beta: usize,
        forward: usize,
        backward: usize,
    },

    #[error("class size for degree {0} is not an integer")]
    NonIntegerClassSize(usize),

    #[error("input is not graphical: {0}")]
    NotGraphical(String),

    #[error("triplet cannot be balanced: {0}")]
    InfeasibleBalance(String),

    #[error("no feasible spectrum value for node {node} towards class {class}")]
    NoFeasibleValue { node: usize, class: usize },

    #[error("empty feasible range [{low}, {high}] for node {node} towards class {class}")]
    EmptyRange {
        node: usize,
        class: usize,
        low: i64,
        high: i64,
    },

    #[error("spectra matrix is inconsistent with the joint-degree matrix: {0}")]
    InconsistentSpectra(String),

    #[error("series is empty")]
    EmptySeries,

    #[error("maximum cycle length {0} exceeds the supported limit of {limit}", limit = crate::estimate::MAX_CYCLE_LEN)]
    MaxLenExceeded(usize),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },

    #[error("sampler invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
