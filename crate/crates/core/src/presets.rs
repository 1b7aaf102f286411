//! Stock potentials with known closed forms.
//!
//! Every preset is radial and effectively supported well inside the box, so
//! the periodic wrap-around of the lattice is below double precision for
//! the parameter ranges used in tests.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Space};
use crate::norms::{l1_norm, triple_norm, DyadicDecomposition};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `amplitude * exp(-(|x| / width)^2)` sampled on the lattice.
pub fn gaussian(grid: Grid, amplitude: f64, width: f64) -> Field {
    let inv = 1.0 / (width * width);
    Field::from_physical_fn(grid, |x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        Complex64::new(amplitude * (-r2 * inv).exp(), 0.0)
    })
}

/// Exact Fourier transform of [`gaussian`] at one frequency, in the
/// unitary convention with the `(2 pi)^{-n/2}` factor on the forward side.
pub fn gaussian_fourier_at(amplitude: f64, width: f64, xi: &[f64]) -> Complex64 {
    let n = xi.len() as f64;
    let s2 = width * width;
    let xi2: f64 = xi.iter().map(|c| c * c).sum();
    Complex64::new(
        amplitude * (s2 / 2.0).powf(n / 2.0) * (-s2 * xi2 / 4.0).exp(),
        0.0,
    )
}

/// Compactly supported bump `amplitude * exp(1 - 1/(1 - (|x|/radius)^2))`
/// inside `|x| < radius`, zero outside.
pub fn bump(grid: Grid, amplitude: f64, radius: f64) -> Field {
    let inv = 1.0 / (radius * radius);
    Field::from_physical_fn(grid, |x| {
        let q: f64 = x.iter().map(|c| c * c).sum::<f64>() * inv;
        if q >= 1.0 {
            Complex64::ZERO
        } else {
            Complex64::new(amplitude * (1.0 - 1.0 / (1.0 - q)).exp(), 0.0)
        }
    })
}

/// The zero potential.
pub fn zero(grid: Grid) -> Field {
    Field::zeros(grid, Space::Physical)
}

/// Piecewise-constant shell profile `amplitude * 2^{-rate * j}` on the
/// dyadic shell `D_j`.  The weighted supremum norm of the sampled field is
/// exactly `amplitude * sum_j 2^{(1 - rate) j}` over the occupied shells.
pub fn dyadic(grid: Grid, amplitude: f64, rate: f64) -> Field {
    let shells = DyadicDecomposition::new(grid);
    let values = (0..grid.point_count())
        .map(|flat| {
            let j = shells.annulus_index(flat) as f64;
            Complex64::new(amplitude * (-rate * j).exp2(), 0.0)
        })
        .collect();
    Field::from_values(grid, Space::Physical, values).expect("one value per lattice point")
}

/// `integral of |V|` for [`gaussian`]: `amplitude * (sqrt(pi) * width)^n`.
pub fn gaussian_l1(amplitude: f64, width: f64, dim: usize) -> f64 {
    amplitude.abs() * (PI.sqrt() * width).powi(dim as i32)
}

/// Symbolic description of a stock potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetKind {
    Gaussian { amplitude: f64, width: f64 },
    Bump { amplitude: f64, radius: f64 },
    Dyadic { amplitude: f64, rate: f64 },
    Zero,
}

/// A sampled preset together with the norm metadata experiments report.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PresetKind,
    pub field: Field,
    /// Weighted supremum norm of the samples.
    pub triple_norm: f64,
    /// Lattice `L1` norm of the samples.
    pub l1_norm: f64,
}

/// Samples a preset on `grid` and records its norms.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when a length scale is not positive, a decay
/// rate is negative, or an amplitude is not finite.
pub fn sample(kind: PresetKind, grid: Grid) -> Result<PotentialSpec> {
    let check_amplitude = |a: f64| {
        if a.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("amplitude must be finite, got {a}")))
        }
    };
    let field = match kind {
        PresetKind::Gaussian { amplitude, width } => {
            check_amplitude(amplitude)?;
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::invalid(format!(
                    "gaussian width must be positive, got {width}"
                )));
            }
            gaussian(grid, amplitude, width)
        }
        PresetKind::Bump { amplitude, radius } => {
            check_amplitude(amplitude)?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::invalid(format!(
                    "bump radius must be positive, got {radius}"
                )));
            }
            bump(grid, amplitude, radius)
        }
        PresetKind::Dyadic { amplitude, rate } => {
            check_amplitude(amplitude)?;
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(Error::invalid(format!(
                    "shell decay rate must be nonnegative, got {rate}"
                )));
            }
            dyadic(grid, amplitude, rate)
        }
        PresetKind::Zero => zero(grid),
    };
    let triple = triple_norm(&field)?;
    let l1 = l1_norm(&field)?;
    Ok(PotentialSpec {
        kind,
        field,
        triple_norm: triple,
        l1_norm: l1,
    })
}
