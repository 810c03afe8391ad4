use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a jammer coincides with the receiver position")]
    JammerAtReceiver,

    #[error("link endpoints coincide")]
    CoincidentPositions,

    #[error("edge {tx} -> {rx} has coincident endpoints")]
    CoincidentEndpoints { tx: String, rx: String },

    #[error("scenario is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<Violation>),

    #[error("matrix is not symmetric (max deviation {deviation:e}, tolerance {tolerance:e})")]
    Asymmetric { deviation: f64, tolerance: f64 },

    #[error("matrix must have at least {min} rows, got {n}")]
    TooSmall { n: usize, min: usize },

    #[error("exhaustive enumeration limited to {max} nodes, got {n}")]
    TooManyNodes { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("initial placement violates constraint: {0}")]
    InfeasibleStart(String),

    #[error("could not place {uavs} UAVs with separation {d_min} m after {attempts} attempts")]
    GeneratorExhausted { uavs: usize, d_min: f64, attempts: usize },

    #[error("topology needs a {0} node")]
    MissingRole(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("jacobi eigensolver did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}
