//! Error types shared across the crate.

use thiserror::Error;

/// Errors surfaced by curve construction, Möbius evaluation, and the
/// integral operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A point was mapped onto (or numerically onto) an inversion center.
    #[error("Möbius pole hit: point at distance {distance:.3e} from an inversion center")]
    Pole { distance: f64 },

    /// Two points that must be distinct coincide (|x − y| < 1e-12).
    #[error("coincident points: |x - y| = {distance:.3e}")]
    CoincidentPoints { distance: f64 },

    /// The evaluation point lies on (or within 1e-6 of) the knot.
    #[error("point lies on the knot (distance {distance:.3e})")]
    PointOnKnot { distance: f64 },

    /// Two curves that must be disjoint come closer than 1e-6.
    #[error("curves intersect or nearly intersect (min distance {distance:.3e})")]
    CurvesIntersect { distance: f64 },

    /// |γ′(s)| fell below the regularity threshold.
    #[error("degenerate curve: speed {speed:.3e} at s = {s}")]
    DegenerateCurve { speed: f64, s: f64 },

    /// A knot or Möbius document failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// A parsed document describes an invalid object (non-regular or
    /// self-intersecting curve, bad matrix, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation that requires a positive excision radius got ε = 0.
    #[error("invalid cutoff: this integral diverges without a positive excision radius")]
    InvalidCutoff,

    /// Cyclic-order test received duplicate parameters.
    #[error("duplicate parameter values in cyclic-order test")]
    DuplicateParameter,
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
