//! Error type shared across the toolkit.

use thiserror::Error;

/// Alias used by every fallible routine in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the numerical routines and the field codec.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid constructed with an odd or too-small point count.
    #[error("grid needs an even point count of at least 16 per axis, got {size}")]
    OddN { size: usize },

    /// Dimension outside the supported range.
    #[error("dimension {dim} unsupported, expected 1, 2, or 3")]
    BadDimension { dim: usize },

    /// Operation applied to a field in the wrong space.
    #[error("field is in {found} space, operation needs {needed}")]
    SpaceMismatch {
        needed: &'static str,
        found: &'static str,
    },

    /// Two fields expected to share a grid.
    #[error("grids disagree: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    /// Direction nodes too coarse for the requested cap width.
    #[error(
        "cap of angular half-width {half_width:.3e} needs node spacing at most {required:.3e}, \
         {nodes} nodes give {actual:.3e}"
    )]
    UnderresolvedCap {
        half_width: f64,
        required: f64,
        actual: f64,
        nodes: usize,
    },

    /// Spatial grid too coarse for the requested wavenumber.
    #[error(
        "wavenumber {lambda} on half-width {half_width} needs at least {required} points \
         per axis, grid has {actual}"
    )]
    UnderresolvedGrid {
        lambda: f64,
        half_width: f64,
        required: usize,
        actual: usize,
    },

    /// Fixed-point iteration for the scattered correction stopped contracting.
    #[error("correction series diverged after {iterations} iterations, last ratio {ratio:.3e}")]
    DivergentSeries { iterations: usize, ratio: f64 },

    /// Fixed-point iteration ran out of its budget before reaching tolerance.
    #[error(
        "no convergence after {iterations} iterations, last step {last_step:.3e} \
         against tolerance {tol:.3e}"
    )]
    MaxIterations {
        iterations: usize,
        last_step: f64,
        tol: f64,
    },

    /// Parameter outside its documented domain.
    #[error("{what}")]
    InvalidParameter { what: String },

    /// Underlying I/O failure while reading or writing a field snapshot.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Field snapshot malformed or truncated.
    #[error("bad field file: {what}")]
    BadFieldFile { what: String },
}

impl Error {
    /// Shorthand for [`Error::InvalidParameter`] with a formatted message.
    pub fn invalid(what: impl Into<String>) -> Error {
        Error::InvalidParameter { what: what.into() }
    }
}
