use thiserror::Error;

/// Errors raised by the numerical pipeline. Each variant names the module
/// that produced it so failures deep inside a sweep stay attributable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: domain error: {msg}")]
    Domain { module: &'static str, msg: String },

    #[error("{module}: no convergence: {msg}")]
    Convergence { module: &'static str, msg: String },

    #[error("{module}: invalid parameter `{field}`: {msg}")]
    InvalidParam {
        module: &'static str,
        field: &'static str,
        msg: String,
    },

    #[error("fockspace: degenerate cat normalization (N_s = {norm:e}) for s = {s}")]
    DegenerateNormalization { s: usize, norm: f64 },

    #[error("floquet_solver: composite dimension {dim} exceeds limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("magnus: tau grid of {grid} points under-resolves l_max = {l_max} (need >= {need})")]
    Aliasing { l_max: usize, grid: usize, need: usize },

    #[error("config: field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(module: &'static str, field: &'static str, msg: impl Into<String>) -> Error {
    Error::InvalidParam {
        module,
        field,
        msg: msg.into(),
    }
}
