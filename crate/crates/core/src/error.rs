use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or model parameter violates its constraints.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested probability band reaches zero, so the matching quantile is unbounded.
    #[error("unbounded band: lower probability edge {lower_edge} is not positive")]
    UnboundedBand { lower_edge: f64 },

    /// The first moment of the distribution does not exist.
    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    /// A sweep grid does not contain enough qualifying points.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    QuadratureNotConverged { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
