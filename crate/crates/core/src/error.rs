use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid argument or configuration value; the message says which.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The adaptive integrator hit its subdivision budget before reaching
    /// the requested tolerance. The best value found so far is carried along
    /// with its error estimate so callers can decide whether it is usable.
    #[error("quadrature did not converge: value={value:.17e} error_estimate={error_estimate:.3e} after {evaluations} evaluations")]
    MaxDepthExceeded {
        value: f64,
        error_estimate: f64,
        evaluations: u64,
    },

    /// A scan found no value meaningfully away from zero, so there is no
    /// well-defined maximizer to build a ball around.
    #[error("scan values all within {threshold:.3e} of zero")]
    AllNearZero { threshold: f64 },

    /// Region sampling produced no points (degenerate or empty region).
    #[error("region contains no sample points: {0}")]
    EmptyRegion(String),

    /// A growth fit was requested with too few usable points.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}
