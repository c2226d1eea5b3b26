use thiserror::Error;

/// Crate-wide error type. Variants split into two families: bad input
/// (dimensions, ranges, malformed arguments) and numerical failures
/// (invariant drift, consistency residuals, invalid states reached at
/// runtime). The CLI maps the families to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a probability vector: {0}")]
    InvalidSimplex(String),

    #[error("{what} drift {drift:.3e} exceeds {limit:.1e} at t={t}; reduce the step size")]
    DriftExceeded {
        what: &'static str,
        t: f64,
        drift: f64,
        limit: f64,
    },

    #[error("internal consistency check failed: {what} residual {residual:.3e} exceeds {limit:.1e}")]
    ConsistencyFailure {
        what: &'static str,
        residual: f64,
        limit: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("target mean energy {target} is outside the reachable open interval ({min}, {max})")]
    UnreachableTarget { target: f64, min: f64, max: f64 },

    #[error("degenerate spectrum: all energy levels are equal, beta does not move the mean energy")]
    DegenerateSpectrum,

    #[error("kernel row {row} sums to {sum}, not 1")]
    NonStochasticKernel { row: usize, sum: f64 },
}

impl Error {
    /// True for failures produced by the numerics at runtime, as opposed
    /// to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DriftExceeded { .. } | Error::ConsistencyFailure { .. } | Error::InvalidState(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
