use thiserror::Error;

/// Errors raised by model construction, numerics and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("radius {r} outside the model domain (0, {radius}]")]
    OutsideDomain { r: f64, radius: f64 },

    #[error("quantity is singular at the pole (r = 0)")]
    SingularAtPole,

    #[error("quadrature did not converge on [{a}, {b}]: estimate {value:e} with error {error:e} after {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("degenerate cell at node {node} (r = {r}): {reason}")]
    DegenerateCell { node: usize, r: f64, reason: String },

    #[error("eigen solver failed for pair {index}: residual {residual:e} exceeds {bound:e} after {iterations} inverse iterations")]
    EigenConvergence {
        index: usize,
        residual: f64,
        bound: f64,
        iterations: usize,
    },

    #[error("requested {requested} eigenpairs but the accuracy guard allows at most {allowed} on this grid")]
    TooManyModes { requested: usize, allowed: usize },

    #[error("time {t} is below the smallest reliable time {t_min} for the available spectrum")]
    TimeTooSmall { t: f64, t_min: f64 },

    #[error(
        "sector cap of {cap} fiber degrees exceeded before separating the first {k} eigenvalues"
    )]
    SectorCap { cap: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{check} violated: {detail}")]
    Violation { check: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
