//! Spectral toolkit for recovering a compactly supported potential from the
//! behaviour of waves it scatters.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: periodic lattice, complex fields, centred Fourier transforms.
//! * [`field_io`]: binary snapshots of fields.
//! * [`norms`]: dyadic-annulus norms weighting behaviour near the origin
//!   against decay at infinity.
//! * [`herglotz`]: superpositions of plane waves driven by a density on the
//!   unit sphere, plus the sphere quadratures behind them.
//! * [`resolvent`]: regularised division by the characteristic symbol of the
//!   stationary wave equation.
//! * [`scatter`]: stationary states built by fixed-point iteration around an
//!   incident wave.
//! * [`recover`]: pointwise Fourier-mode estimates of the potential from
//!   pairings of stationary states, and full reconstruction on a mode lattice.
//! * [`propagate`]: time evolution, its free-flight oracle, and the pairing
//!   identities connecting time data to stationary states.
//! * [`presets`]: ready-made potentials and densities used by examples and
//!   the acceptance battery.
//! * [`acceptance`]: the end-to-end checks the toolkit is held to.

pub mod acceptance;
pub mod error;
pub mod field_io;
pub mod grid;
pub mod herglotz;
pub mod norms;
pub mod presets;
pub mod propagate;
pub mod recover;
pub mod resolvent;
pub mod scatter;
pub mod util;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Space};
pub use num_complex::Complex64;
