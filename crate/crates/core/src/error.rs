use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the supported evaluation envelope.
    #[error("{name} = {value} outside supported envelope ({limit})")]
    Range {
        name: &'static str,
        value: f64,
        limit: &'static str,
    },
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Quadrature refinement hit its resolution cap before meeting tolerance.
    #[error(
        "quadrature did not converge at resolution {resolution}: last {last:e}, previous {previous:e}"
    )]
    Convergence {
        resolution: usize,
        last: f64,
        previous: f64,
    },
    /// A decay fit could not be formed from the supplied samples.
    #[error("fit error: {0}")]
    Fit(String),
    /// A verification case violates its own stated preconditions.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
