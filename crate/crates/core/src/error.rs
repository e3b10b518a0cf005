use thiserror::Error;

use crate::real::Precision;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A direction or normalization is undefined (zero vector, singular matrix).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Invalid map parameters, counts or option combinations.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precision mismatch: expected {expected} bits, found {found} bits")]
    PrecisionMismatch { expected: Precision, found: Precision },
    /// A difference-quotient offset is too small for the working precision.
    #[error(
        "offset h = {h} is below the order-{order} precision floor at {prec} bits; \
         use h >= {min_h} or raise the precision"
    )]
    PrecisionFloor { order: u8, h: String, min_h: String, prec: Precision },
    #[error("fixed point is not hyperbolic (trace^2 <= 4)")]
    NonHyperbolic,
    /// Adaptive bisection could not bring two neighbouring images within the
    /// requested spacing.
    #[error(
        "spacing unreachable at iteration depth {depth}: parameter interval [{lo}, {hi}] \
         still maps to points further apart than {spacing}"
    )]
    SpacingUnreachable { depth: usize, lo: String, hi: String, spacing: String },
}
