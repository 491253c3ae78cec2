use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} lies outside [0, 1]")]
    Domain { what: &'static str, value: f64 },

    #[error("non-finite value {value} at t = {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// No computed eigenvalue is close enough to the target; usually the mesh is too coarse.
    #[error("no eigenvalue within {radius:.3e} of target {target}")]
    NoEigenvalue { target: f64, radius: f64 },

    #[error("eigenvalue {0:e} is too small to invert")]
    SmallEigenvalue(f64),

    #[error("recovered eigenvector is spurious (sup norm {0:e})")]
    SpuriousVector(f64),

    #[error("reference oracle failure: {0}")]
    Oracle(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
