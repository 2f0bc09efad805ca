use thiserror::Error;

/// Errors raised across the scattering toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// An exact pole (zero denominator) was hit. Callers treat this as a signal, not a crash.
    #[error("pole encountered at E = {re} {im:+}i")]
    Pole { re: f64, im: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("continuation unreliable: {0}")]
    ContinuationUnreliable(String),

    #[error("incomplete root search: {0}")]
    IncompleteSearch(String),

    #[error("function vanishes on the contour boundary near E = {re} {im:+}i")]
    Boundary { re: f64, im: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
