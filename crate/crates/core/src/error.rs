//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Errors raised by curve construction, norm evaluation, index estimation
/// and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Polyline input that cannot describe a rectifiable curve.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A spiral exponent outside the rectifiable regime.
    #[error("curve is not rectifiable for alpha = {alpha}")]
    NotRectifiable { alpha: f64 },

    /// A query point farther than the node tolerance from the curve.
    #[error("point ({re}, {im}) is not on the curve (distance {distance:.3e})")]
    PointNotOnCurve { re: f64, im: f64, distance: f64 },

    /// A scalar argument outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A portion or radius that leaves nothing to integrate over.
    #[error("invalid radius {radius}: {reason}")]
    InvalidRadius { radius: f64, reason: String },

    /// Evaluation exactly at an anchor of an unbounded radial factor.
    #[error("weight is singular at anchor {anchor}")]
    SingularPoint { anchor: usize },

    /// Two estimators of the same quantity disagree beyond tolerance.
    #[error("non-convergence in {what}: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// A modular that stays infinite for every scaling.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Vector length does not match the operator size.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Too few nodes to build a quadrature stencil.
    #[error("degenerate stencil: {0}")]
    DegenerateStencil(String),

    /// Malformed configuration or data file, with a 1-based line number.
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },

    /// File system failure while reading or writing artifacts.
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
