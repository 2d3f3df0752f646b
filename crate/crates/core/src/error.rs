use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Which side of the matrix an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("negative value {value} at row {row}, column {col}")]
    Negative { row: usize, col: usize, value: f64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix")]
    Empty,

    #[error("matrix has zero grand total")]
    ZeroTotal,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("{axis} {index} has zero mass")]
    ZeroMass { axis: Axis, index: usize },

    #[error("index {index} out of range for {axis} count {len}")]
    OutOfRange { axis: Axis, index: usize, len: usize },

    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("kernel is numerically indefinite (eigenvalue {0:e})")]
    Indefinite(f64),

    #[error("power-law fit needs at least 3 distinct points in range, found {0}")]
    InsufficientPoints(usize),

    #[error("zero variance in log x over the fit range")]
    ZeroVariance,

    #[error("all values are zero")]
    AllZero,

    #[error("signal of length {len} is too short, {needed} samples required")]
    SignalTooShort { needed: usize, len: usize },

    #[error("negative signal value {value} at index {index}")]
    NegativeSignal { index: usize, value: f64 },

    #[error("random walk reached {value} at step {step}")]
    WalkCrossedZero { step: usize, value: f64 },

    #[error("{cells} cells exceed the memory budget of {budget} cells")]
    Budget { cells: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes; the CLI maps them onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence(_) | Error::Indefinite(_) | Error::ZeroVariance => {
                ErrorKind::Numerical
            }
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
