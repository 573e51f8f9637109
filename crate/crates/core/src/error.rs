use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at r = {radius}: {reason}")]
    Integration { radius: f64, reason: String },

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("profile construction failed: {0}")]
    Profile(String),

    #[error(
        "tail not asymptotic on [{start}, {end}]: relative deviation {deviation:.3e} exceeds {limit:.1e}; move the window start outward"
    )]
    TailNotAsymptotic {
        start: f64,
        end: f64,
        deviation: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no admissible starting configuration found")]
    NoAdmissibleStart,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
