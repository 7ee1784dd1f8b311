use thiserror::Error;

/// Errors produced by the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension {d}: {what} requires d = 2")]
    UnsupportedDimension { d: usize, what: &'static str },

    #[error("empty cluster: the configuration has no open edges")]
    EmptyCluster,

    #[error("vertex {0} is not a member of the cluster")]
    NotInCluster(u32),

    #[error("mixing time did not bracket below e^-1 by t = {t_max} (last d(t) = {last_distance})")]
    MixingNonConvergence { t_max: f64, last_distance: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (estimate {estimate}, residual {residual})")]
    EigenNonConvergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("inequality violated ({side}): {lhs} > {rhs}")]
    InequalityViolation {
        side: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
