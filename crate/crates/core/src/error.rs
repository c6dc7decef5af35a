use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by construction, verification and search routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("root-of-unity order must be positive")]
    ZeroOrder,

    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { got: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("index {index} out of range [0, {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("tolerance {0} outside (0, 1e-3)")]
    InvalidTolerance(f64),

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not a Zeilinger matrix: {0}")]
    NotZeilinger(String),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("dimension {d} exceeds the search budget of {max} for {what}")]
    BudgetExceeded { what: &'static str, d: usize, max: usize },

    #[error("equivalence witness does not verify: {0}")]
    InvalidWitness(String),

    #[error("no second-side permutation makes the transfer operator bilocal ({searched} candidates searched)")]
    NoBilocalWitness { searched: usize },

    #[error("internal discrepancy: {0}")]
    Discrepancy(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{path}: validation error: {msg}")]
    Validation { path: PathBuf, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
