//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix ingestion, kernels, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line} of {path}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("structurally singular: column {col} cannot be matched to a nonzero row")]
    StructurallySingular { col: usize },

    #[error("diagonal entry missing in dense {axis} {index}: apply a zero-free diagonal permutation first")]
    MissingDiagonal { axis: &'static str, index: usize },

    #[error("capacitance matrix singular")]
    CapacitanceSingular,

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("column {col}: {source}")]
    Column {
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
