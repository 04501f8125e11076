use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the model, estimators, samplers and simulators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("option {option} is not a member of presentation {presentation}")]
    NotInPresentation { option: usize, presentation: String },

    #[error("invalid preference vector: {0}")]
    InvalidPreference(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer did not converge after {iters} iterations (projected gradient {grad_norm:e})")]
    DidNotConverge {
        iters: usize,
        grad_norm: f64,
        best: Vec<f64>,
    },

    #[error("negative Hessian is not positive definite at the mode")]
    NotPositiveDefinite,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("particle weights are degenerate (all zero)")]
    DegenerateWeights,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
