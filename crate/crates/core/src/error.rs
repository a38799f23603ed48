use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step set: {0}")]
    InvalidStepSet(String),

    #[error("invalid torus: {0}")]
    InvalidTorus(String),

    #[error("invalid wave vector: {0}")]
    InvalidWave(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation too close to a pole (denominator {denominator})")]
    Pole { denominator: Complex64 },

    #[error("{what}: requested {requested} exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: f64,
        cap: f64,
    },

    #[error("hypotheses unmet: {0}")]
    HypothesesUnmet(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
