//! Stationary states built around an incident wave.
//!
//! Given a potential `V` and an incident wave `u` solving the free equation,
//! the correction `v` solves `v = P(V (u + v))`, so that `w = u + v`
//! satisfies `(Lap + lambda^2 - V) w = 0`.  The fixed-point iteration below
//! is the Neumann series for `(Id - P V)^{-1} P (V u)` in disguise: same
//! limit, one field of memory.  Contraction of the iteration is also the
//! practical test of being above the potential's coupling threshold, since
//! the constant in the threshold is not known a priori.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::herglotz::{helmholtz_residual, plane_wave};
use crate::norms::{b_star_norm, triple_norm};
use crate::resolvent::{apply_pv, PvSettings};

/// Outcome of a correction solve.
#[derive(Debug, Clone)]
pub struct ScatterResult {
    /// The correction; the stationary state is `u + v`.
    pub v: Field,
    /// Fixed-point steps taken.
    pub iterations: usize,
    /// Per-step ratios `|v_{k+1} - v_k| / |v_k - v_{k-1}|` in the growth
    /// norm, recorded from the second step on.
    pub contraction_ratios: Vec<f64>,
    /// Interior-window relative residual of the stationary equation at
    /// `u + v`.
    pub residual: f64,
    /// `b_star_norm(v) / b_star_norm(u)`.
    pub correction_ratio: f64,
}

/// Coupling threshold `C_n * triple_norm(V)`.
///
/// The constant is a calibration input with default 1; nothing in the
/// library asserts a particular value, and [`empirical_threshold`] measures
/// the real one for a given potential.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `c_n > 0`.
pub fn lambda_threshold(v: &Field, c_n: f64) -> Result<f64> {
    if !(c_n > 0.0 && c_n.is_finite()) {
        return Err(Error::invalid(format!(
            "threshold constant must be positive, got {c_n}"
        )));
    }
    Ok(c_n * triple_norm(v)?)
}

/// Solves `v = P(V (u + v))` by fixed-point iteration with the default
/// resolvent settings.
pub fn solve_correction(
    potential: &Field,
    lambda: f64,
    u: &Field,
    tol: f64,
    max_iter: usize,
) -> Result<ScatterResult> {
    solve_correction_with(potential, lambda, u, tol, max_iter, &PvSettings::default())
}

/// Solves `v = P(V (u + v))` by fixed-point iteration.
///
/// Iterates `v_{k+1} = P(V (u + v_k))` from `v_0 = 0` until the step size
/// `b_star_norm(v_{k+1} - v_k)` drops to `tol * b_star_norm(u)`.
///
/// # Errors
///
/// [`Error::DivergentSeries`] when the step ratio stays at or above 1 for
/// three consecutive steps.
/// [`Error::MaxIterations`] when the budget runs out first.
/// [`Error::InvalidParameter`] for a non-positive `lambda`, tolerance, or a
/// vanishing incident wave.
pub fn solve_correction_with(
    potential: &Field,
    lambda: f64,
    u: &Field,
    tol: f64,
    max_iter: usize,
    settings: &PvSettings,
) -> Result<ScatterResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::invalid("iteration budget must be at least 1"));
    }
    let bstar_u = b_star_norm(u)?;
    if bstar_u == 0.0 {
        return Err(Error::invalid("incident wave vanishes"));
    }

    let mut v = Field::zeros(u.grid(), u.space());
    let mut prev_step: Option<f64> = None;
    let mut ratios = Vec::new();
    let mut non_contracting = 0;

    for iteration in 1..=max_iter {
        let total = u.add(&v)?;
        let coupled = potential.mul(&total)?;
        let next = apply_pv(lambda, &coupled, settings)?;
        let step = b_star_norm(&next.sub(&v)?)?;

        if let Some(prev) = prev_step {
            if prev > 0.0 {
                let ratio = step / prev;
                ratios.push(ratio);
                if ratio >= 1.0 {
                    non_contracting += 1;
                } else {
                    non_contracting = 0;
                }
                if non_contracting >= 3 {
                    return Err(Error::DivergentSeries {
                        iterations: iteration,
                        ratio,
                    });
                }
            }
        }

        v = next;
        prev_step = Some(step);

        if step <= tol * bstar_u {
            let w = u.add(&v)?;
            let residual = helmholtz_residual(&w, lambda, Some(potential))?;
            let correction_ratio = b_star_norm(&v)? / bstar_u;
            return Ok(ScatterResult {
                v,
                iterations: iteration,
                contraction_ratios: ratios,
                residual,
                correction_ratio,
            });
        }
    }

    Err(Error::MaxIterations {
        iterations: max_iter,
        last_step: prev_step.unwrap_or(f64::NAN),
        tol: tol * bstar_u,
    })
}

/// Measures the coupling threshold of a potential from the observed
/// contraction rate.
///
/// Runs a solve at `lambda_ref` with an axis plane wave as the incident
/// field and scales the worst observed contraction ratio back to the
/// wavenumber where it would reach 1.  The reference wavenumber must itself
/// be comfortably convergent; pick it well above the expected threshold.
pub fn empirical_threshold(
    potential: &Field,
    lambda_ref: f64,
    settings: &PvSettings,
) -> Result<f64> {
    let grid = potential.grid();
    let mut direction = [0.0f64; 3];
    direction[0] = 1.0;
    let u = plane_wave(lambda_ref, &direction[..grid.dim()], grid)?;
    let solved = solve_correction_with(potential, lambda_ref, &u, 1e-10, 200, settings)?;
    let worst = solved
        .contraction_ratios
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    Ok(worst * lambda_ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Space};
    use crate::presets;
    use num_complex::Complex64;

    fn gaussian_potential(grid: Grid) -> Field {
        presets::gaussian(grid, 0.5, 0.3)
    }

    #[test]
    fn threshold_is_the_weighted_sup_norm() {
        let grid = Grid::new(2, 64, 4.0).unwrap();
        let zero = Field::zeros(grid, Space::Physical);
        assert_eq!(lambda_threshold(&zero, 1.0).unwrap(), 0.0);

        let ball = Field::from_physical_fn(grid, |x| {
            if x.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        });
        assert!((lambda_threshold(&ball, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (lambda_threshold(&ball.scaled(3.0.into()), 1.0).unwrap() - 3.0).abs() < 1e-12
        );
        assert!(lambda_threshold(&ball, 0.0).is_err());
    }

    #[test]
    fn zero_potential_converges_immediately() {
        let grid = Grid::new(2, 64, 2.0).unwrap();
        let zero = Field::zeros(grid, Space::Physical);
        let u = plane_wave(6.0, &[1.0, 0.0], grid).unwrap();
        let out = solve_correction(&zero, 6.0, &u, 1e-10, 50).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.v.max_abs(), 0.0);
        assert_eq!(out.correction_ratio, 0.0);
        assert!(out.contraction_ratios.is_empty());
    }

    #[test]
    fn gaussian_potential_contracts_above_threshold() {
        let grid = Grid::new(2, 128, 2.0).unwrap();
        let pot = gaussian_potential(grid);
        let u = plane_wave(16.0, &[1.0, 0.0], grid).unwrap();
        let out = solve_correction(&pot, 16.0, &u, 1e-8, 60).unwrap();
        assert!(out.iterations >= 2);
        assert!(out.contraction_ratios.iter().all(|r| *r < 1.0));
        assert!(out.residual < 1e-3, "residual {}", out.residual);
        assert!(out.correction_ratio < 1.0);
    }

    #[test]
    fn strong_potential_diverges() {
        let grid = Grid::new(2, 64, 2.0).unwrap();
        let pot = gaussian_potential(grid).scaled(1000.0.into());
        let u = plane_wave(6.0, &[1.0, 0.0], grid).unwrap();
        let err = solve_correction(&pot, 6.0, &u, 1e-8, 60).unwrap_err();
        assert!(matches!(err, Error::DivergentSeries { .. }), "got {err}");
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let grid = Grid::new(2, 64, 2.0).unwrap();
        let pot = gaussian_potential(grid);
        let u = plane_wave(6.0, &[1.0, 0.0], grid).unwrap();
        let err = solve_correction(&pot, 6.0, &u, 1e-15, 2).unwrap_err();
        assert!(matches!(err, Error::MaxIterations { .. }), "got {err}");
    }

    #[test]
    fn correction_is_linear_in_the_incident_wave() {
        let grid = Grid::new(2, 64, 2.0).unwrap();
        let pot = gaussian_potential(grid);
        let lambda = 6.0;
        let ua = plane_wave(lambda, &[1.0, 0.0], grid).unwrap();
        let ub = plane_wave(lambda, &[0.0, 1.0], grid).unwrap();
        let va = solve_correction(&pot, lambda, &ua, 1e-12, 80).unwrap().v;
        let vb = solve_correction(&pot, lambda, &ub, 1e-12, 80).unwrap().v;
        let vsum = solve_correction(&pot, lambda, &ua.add(&ub).unwrap(), 1e-12, 80)
            .unwrap()
            .v;
        let err = vsum.sub(&va.add(&vb).unwrap()).unwrap().max_abs() / vsum.max_abs();
        assert!(err < 1e-8, "linearity defect {err}");
    }

    #[test]
    fn residual_improves_with_tighter_tolerances() {
        let grid = Grid::new(2, 128, 2.0).unwrap();
        let pot = gaussian_potential(grid);
        let u = plane_wave(8.0, &[1.0, 0.0], grid).unwrap();
        let mut last = f64::INFINITY;
        for tol in [0.5, 1e-2, 1e-6, 1e-10] {
            let out = solve_correction(&pot, 8.0, &u, tol, 100).unwrap();
            assert!(
                out.residual <= last * 1.1,
                "residual {} after {} (tol {tol})",
                out.residual,
                last
            );
            last = out.residual;
        }
    }

    #[test]
    fn threshold_estimate_scales_with_the_potential() {
        let grid = Grid::new(2, 128, 2.0).unwrap();
        let pot = gaussian_potential(grid);
        let settings = PvSettings::default();
        let t1 = empirical_threshold(&pot, 16.0, &settings).unwrap();
        let t2 = empirical_threshold(&pot.scaled(2.0.into()), 16.0, &settings).unwrap();
        assert!(t1 > 0.0);
        let growth = t2 / t1;
        assert!(
            (1.5..=2.5).contains(&growth),
            "doubling the potential moved the threshold by {growth}"
        );
    }
}
