use thiserror::Error;

/// Errors raised by profile construction, the model equations, the solver
/// and the post-processing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("profile is not strictly subsonic: infimum {inf_b} must be at least {min}")]
    NotSubsonic { inf_b: f64, min: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("flux degeneracy at node {node}: n = {value} does not exceed j = {j}")]
    FluxDegeneracy { node: usize, value: f64, j: f64 },

    #[error("degenerate state: n = {value} at interior node {node}")]
    DegenerateState { node: usize, value: f64 },

    #[error("Newton failed to converge at j = {j}: residual {residual:e} after {iterations} iterations")]
    Convergence {
        j: f64,
        residual: f64,
        iterations: usize,
        last_iterate: Vec<f64>,
    },

    #[error("solution post-check failed: {0}")]
    PostCheck(String),

    #[error("inconsistent solution: {0}")]
    Inconsistent(String),

    #[error("solutions live on different grids")]
    IncomparableGrids,

    #[error("insufficient data: {have} nodes in window, need {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
