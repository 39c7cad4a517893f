use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("graph is not connected over its positive-weight edges")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown mobility `{0}` (expected arithmetic|logarithmic|harmonic)")]
    UnknownMobility(String),

    #[error("mobility constant C_g diverges: {0}")]
    DivergentConstant(String),

    #[error("quadrature failed to converge (estimated error {err:.3e} > {tol:.3e})")]
    QuadratureNonConvergence { err: f64, tol: f64 },

    #[error("rho has entries at or below the boundary threshold; {0} requires an interior point")]
    BoundaryRho(&'static str),

    #[error("weighted Laplacian is singular on the zero-mean subspace: {0}")]
    SingularLaplacian(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
