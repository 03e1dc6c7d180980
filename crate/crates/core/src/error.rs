use thiserror::Error;

use crate::ratlinalg::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Indices are reported 1-based, as in game files.
    #[error("transition row (state {state}, i {i}, j {j}) sums to {sum}, expected exactly 1")]
    NotStochastic {
        state: usize,
        i: usize,
        j: usize,
        sum: Rational,
    },

    #[error("game is not absorbing: {0}")]
    NotAbsorbing(String),

    #[error("W matrix needs {entries} entries, above the cap of {cap}; reduce states/actions or raise the cap")]
    ResourceCap { entries: u128, cap: u128 },

    #[error("sign of F at z = {z} undecided: no {window} consecutive equal signs up to ladder depth {depth}; raise the depth cap")]
    UndecidedSign { z: Rational, window: usize, depth: u32 },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceCap { .. } => 3,
            Error::UndecidedSign { .. } => 4,
            Error::Internal(_) | Error::Io(_) => 1,
            _ => 2,
        }
    }
}
