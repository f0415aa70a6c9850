//! Crate-wide error type.
//!
//! The message strings are part of the public contract: the CLI prints them
//! verbatim and integration tests match on them exactly, so they must not be
//! reworded casually.

use thiserror::Error;

/// Errors produced by geometry, deformation, and matter computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A derivative stencil or gradient closure produced a non-finite value.
    #[error("field not differentiable here")]
    FieldNotDifferentiable,

    /// The frame coefficient matrix is numerically singular at the point.
    #[error("degenerate frame")]
    DegenerateFrame,

    /// The metric component matrix cannot be inverted at the point.
    #[error("metric not invertible")]
    MetricNotInvertible,

    /// The rank-2 or rank-4 spinor metric cannot be inverted at the point.
    #[error("spinor metric degenerate")]
    SpinorMetricDegenerate,

    /// The perturbation component matrix failed its symmetry check.
    #[error("perturbation not symmetric")]
    PerturbationNotSymmetric,

    /// A finite deformation pushed the frame transform outside the oriented,
    /// forward-pointing class.
    #[error("deformation too large: frame loses polarization/orientation")]
    DeformationTooLarge,

    /// A quantity that must be real came out with a structurally wrong
    /// imaginary part (inconsistent conjugate inputs, not float noise).
    #[error("reality identity violated")]
    RealityIdentityViolated,

    /// A scenario file, expression, or option failed to parse or validate.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Convenience constructor for validation failures with context.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_are_pinned() {
        assert_eq!(
            Error::FieldNotDifferentiable.to_string(),
            "field not differentiable here"
        );
        assert_eq!(Error::DegenerateFrame.to_string(), "degenerate frame");
        assert_eq!(
            Error::MetricNotInvertible.to_string(),
            "metric not invertible"
        );
        assert_eq!(
            Error::SpinorMetricDegenerate.to_string(),
            "spinor metric degenerate"
        );
        assert_eq!(
            Error::PerturbationNotSymmetric.to_string(),
            "perturbation not symmetric"
        );
        assert_eq!(
            Error::DeformationTooLarge.to_string(),
            "deformation too large: frame loses polarization/orientation"
        );
        assert_eq!(
            Error::RealityIdentityViolated.to_string(),
            "reality identity violated"
        );
    }
}
