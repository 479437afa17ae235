use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown function family `{0}`")]
    UnknownFamily(String),

    #[error("{function}: t = {t} is outside the domain [{lo}, {hi}]")]
    OutsideDomain { function: String, t: f64, lo: f64, hi: f64 },

    #[error("non-finite value {value} at t = {t}")]
    NonFinite { t: f64, value: f64 },

    #[error("quadrature on [{a}, {b}] did not converge: error estimate {error_estimate:e} > tolerance {tolerance:e} after {panels} panels")]
    NoConvergence { a: f64, b: f64, panels: usize, error_estimate: f64, tolerance: f64 },

    #[error("derivative mismatch at t = {t}: supplied {supplied}, finite difference {finite_difference}")]
    DerivativeMismatch { t: f64, supplied: f64, finite_difference: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("convexity check left the domain [0, {b_star}] at {point}")]
    DomainExit { point: f64, b_star: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
