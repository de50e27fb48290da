use thiserror::Error;

/// Errors produced by grid construction, operators, solvers and the
/// scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{key}`: {message}")]
    InvalidParam { key: String, message: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("dilation factor {factor:.3e} aliases on an n = {n} grid (limit n/4)")]
    Aliasing { factor: f64, n: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("energy increased by {increase:.3e} at iteration {iteration}; step size too large")]
    TooLargeStep { iteration: usize, increase: f64 },

    #[error("dilation root not bracketed; seed rejected")]
    SeedRejected,

    #[error("descent stagnated at residual {residual:.3e}")]
    Stagnation { residual: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(key: &str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
