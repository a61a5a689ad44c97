use thiserror::Error;

use crate::linearize::LinearizationType;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty {0}: dimensions must be positive")]
    Empty(&'static str),

    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("combinatorial guard exceeded: {what} = {actual} > {limit}")]
    Guard {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("RIP of order {order} fails: some {order} columns are linearly dependent")]
    RipFails { order: usize },

    #[error("NSP of order {order} fails: a null-space vector is {order}-sparse")]
    NspFails { order: usize },

    #[error("matrix is not invertible (rank {rank} < {size})")]
    NotInvertible { rank: usize, size: usize },

    #[error("matrix is not a permuted invertible diagonal matrix")]
    NotMonomial,

    #[error("input entry {index} = {value} outside the open interval (-pi, pi)")]
    Domain { index: usize, value: f64 },

    #[error("requirement of linearization type {ty} violated{}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Requirement {
        ty: LinearizationType,
        index: Option<usize>,
    },

    #[error("map does not qualify for {composition} composition (best linearization: {best})")]
    NotQualified {
        composition: &'static str,
        best: String,
    },

    #[error("no solution with at most {k_max} nonzeros")]
    NotFound { k_max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a solver or a sparse-recovery property, as
    /// opposed to malformed input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::RipFails { .. } | Error::NspFails { .. } | Error::NotFound { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
