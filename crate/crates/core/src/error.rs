use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by table construction, fitting, I/O and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix contains a negative count {value} at ({row}, {col})")]
    NegativeCount { row: usize, col: usize, value: f64 },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    NoConvergence { rows: usize, cols: usize },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} at index {index}")]
    NotPositiveDefinite { eigenvalue: f64, index: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("requested {k} dimensions, valid range is 1..={max}")]
    InvalidRank { k: usize, max: usize },

    #[error("table is empty after dropping zero-marginal categories")]
    EmptyTable,

    #[error("observation list is empty")]
    NoObservations,

    #[error("empty vocabulary: no co-occurrence pairs remain")]
    EmptyVocabulary,

    #[error("non-positive modified marginal {value:e} for label `{label}`")]
    NonPositiveMarginal { label: String, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: file is empty")]
    EmptyFile(PathBuf),

    #[error("lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("need at least two values for a rank correlation, got {0}")]
    TooFewValues(usize),

    #[error("rank correlation is undefined for a constant list")]
    ConstantInput,

    #[error("zero usable pairs")]
    ZeroUsablePairs,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
