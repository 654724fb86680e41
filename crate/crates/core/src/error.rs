use thiserror::Error;

/// Errors raised by the geometry, measure, moment and oracle routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected D = {expected}, got D = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("normalization violated: total weight deviates from 1 by {deficit:e}")]
    Normalization { deficit: f64 },

    #[error("{what}: required {required:e} exceeds budget {limit:e}")]
    Budget {
        what: &'static str,
        required: f64,
        limit: f64,
    },

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("quadrature did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("engine {engine} cannot evaluate measure family {family}")]
    Incompatible { engine: String, family: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn budget<T>(what: &'static str, required: f64, limit: f64) -> Result<T> {
    Err(Error::Budget { what, required, limit })
}
