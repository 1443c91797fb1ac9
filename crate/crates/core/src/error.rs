use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition on the arguments does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A wedge product with a repeated factor was requested.
    #[error("degenerate wedge: factor {0} repeated")]
    DegenerateWedge(usize),

    /// A dense matrix would exceed the configured size cap.
    #[error("matrix of size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    /// Malformed or non-finite input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// A quadrature or tail estimate could not reach its accuracy target.
    #[error("accuracy target {target:e} not reached (achieved {achieved:e})")]
    Accuracy { achieved: f64, target: f64 },

    /// A Monte Carlo estimate is too noisy to support a verdict.
    #[error(
        "insufficient statistical power: relative half-width {half_width:.3e} exceeds {limit:.3e}"
    )]
    StatisticalPower { half_width: f64, limit: f64 },

    /// Every candidate in a norm search was numerically zero.
    #[error("all {0} candidates were numerically degenerate")]
    DegenerateSearch(usize),

    /// FFLD container parse error.
    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
