use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad dimensions: {0}")]
    BadDims(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("second difference is not O(t^2) near t = 0 (field not C^2 at the evaluation point)")]
    NonIntegrableSingularity,

    #[error("integral is not convergent: {0}")]
    NonIntegrable(String),

    #[error("quadrature tolerance not met: estimate {estimate:e} > tol {tol:e}")]
    TolNotMet { estimate: f64, tol: f64 },

    #[error("degenerate chart: orthonormalization met a rank-deficient matrix")]
    DegenerateChart,

    #[error("point rejected: {0}")]
    PointRejected(String),

    #[error("zero-order coefficient too large: ||c+|| = {c_plus} >= {limit}")]
    CZeroOrderTooLarge { c_plus: f64, limit: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("monotonicity condition violated: dt * weight = {0} > 1")]
    MonotonicityViolated(f64),

    #[error("outer iteration diverged at step {iteration} (sup norm {norm:e})")]
    Diverged { iteration: usize, norm: f64 },

    #[error("sub/supersolution not certified: {0}")]
    NotCertified(String),

    #[error("no divergence found below cap {cap}")]
    BracketNotFound { cap: f64 },

    #[error("insufficient near-boundary band: {0} usable nodes")]
    InsufficientBand(usize),

    #[error("field takes negative values (min {0:e})")]
    NegativeValues(f64),

    #[error("grid file format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
