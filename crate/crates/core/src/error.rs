use std::fmt;

/// Failure record of an adaptive quadrature that hit its subdivision limit.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    /// Worst remaining subinterval, in the integrator's internal variable.
    pub worst_interval: (f64, f64),
    /// Error estimate on that subinterval.
    pub worst_error: f64,
    /// Summed error estimate over all subintervals.
    pub total_error: f64,
    /// Tolerance that was requested.
    pub tolerance: f64,
    pub subdivisions: usize,
}

impl fmt::Display for QuadratureFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no convergence after {} subdivisions (error {:.3e} > tol {:.3e}; worst [{:.6e}, {:.6e}] with {:.3e})",
            self.subdivisions,
            self.total_error,
            self.tolerance,
            self.worst_interval.0,
            self.worst_interval.1,
            self.worst_error
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Physically or mathematically invalid input.
    #[error("domain error: {0}")]
    Domain(String),
    /// Adaptive quadrature failed; `context` names the offending element.
    #[error("quadrature failed for {context}: {failure}")]
    Quadrature {
        context: String,
        failure: QuadratureFailure,
    },
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("overlap matrix has no retained modes above the drop tolerance")]
    EmptySubspace,
    #[error("band edge search failed: {0}")]
    BandEdge(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
