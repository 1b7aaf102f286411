//! Division by the characteristic symbol `lambda^2 - |xi|^2`.
//!
//! The principal-value inverse of `Lap + lambda^2` is realised as the
//! regularised Fourier multiplier
//!
//! ```text
//! m(xi) = (lambda^2 - |xi|^2) / ((lambda^2 - |xi|^2)^2 + eta^2)
//! ```
//!
//! the real part of the limiting-absorption symbol.  As `eta -> 0` the
//! multiplier converges to the principal value; its error on a fixed mode is
//! proportional to `eta^2`, so an optional extrapolation stage combines
//! several `eta` values polynomially in `eta^2` to cancel the leading terms.


use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::norms::{b_norm, b_star_norm};
use crate::util::log_log_slope;

/// How the regularisation width is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    /// Use [`PvSettings::eta`] as given, in squared-frequency units.
    Fixed,
    /// `eta = c * (pi/L) * 2 lambda`: `c` times the variation of the symbol
    /// across one frequency cell at the shell.
    GridTied { c: f64 },
}

/// Regularisation settings for [`apply_pv`].
#[derive(Debug, Clone)]
pub struct PvSettings {
    /// Width used by [`EtaRule::Fixed`].
    pub eta: f64,
    /// Width selection rule.
    pub eta_rule: EtaRule,
    /// Optional extrapolation ladder: strictly decreasing widths, combined
    /// polynomially in `eta^2` toward `eta = 0`.  When set, the ladder is
    /// used as given and the rule above is ignored.
    pub extrapolate: Option<Vec<f64>>,
}

impl PvSettings {
    /// Fixed width, no extrapolation.
    pub fn fixed(eta: f64) -> PvSettings {
        PvSettings {
            eta,
            eta_rule: EtaRule::Fixed,
            extrapolate: None,
        }
    }

    /// Grid-tied width with multiplier `c`, no extrapolation.
    pub fn grid_tied(c: f64) -> PvSettings {
        PvSettings {
            eta: 0.0,
            eta_rule: EtaRule::GridTied { c },
            extrapolate: None,
        }
    }

    /// Adds an extrapolation ladder.
    pub fn with_extrapolation(mut self, etas: Vec<f64>) -> PvSettings {
        self.extrapolate = Some(etas);
        self
    }

    /// The width the settings resolve to for a given wavenumber and grid.
    ///
    /// With an extrapolation ladder this is the smallest (last) entry, the
    /// width that limits the remaining regularisation error.
    pub fn effective_eta(&self, lambda: f64, grid: Grid) -> f64 {
        if let Some(list) = &self.extrapolate {
            return *list.last().unwrap();
        }
        match self.eta_rule {
            EtaRule::Fixed => self.eta,
            EtaRule::GridTied { c } => c * grid.freq_spacing() * 2.0 * lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(list) = &self.extrapolate {
            if list.len() < 2 {
                return Err(Error::invalid(
                    "extrapolation ladder wants at least two widths",
                ));
            }
            for pair in list.windows(2) {
                if !(pair[1] > 0.0 && pair[1] < pair[0]) {
                    return Err(Error::invalid(format!(
                        "extrapolation ladder must be strictly decreasing and positive, got {list:?}"
                    )));
                }
            }
            if !(list[0].is_finite() && list[0] > 0.0) {
                return Err(Error::invalid(
                    "extrapolation ladder must hold positive widths",
                ));
            }
            return Ok(());
        }
        match self.eta_rule {
            EtaRule::Fixed => {
                if !(self.eta > 0.0 && self.eta.is_finite()) {
                    return Err(Error::invalid(format!(
                        "regularisation width must be positive, got {}",
                        self.eta
                    )));
                }
            }
            EtaRule::GridTied { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid(format!(
                        "grid-tied width multiplier must be positive, got {c}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Default for PvSettings {
    /// Grid-tied width spanning four frequency cells at the shell.
    fn default() -> PvSettings {
        PvSettings::grid_tied(4.0)
    }
}

/// Regularised symbol value at `diff = lambda^2 - |xi|^2`.
fn symbol(diff: f64, eta: f64) -> f64 {
    diff / (diff * diff + eta * eta)
}

/// Polynomial extrapolation of the symbol to `eta = 0` in the variable
/// `eta^2`, over the given ladder.  With two widths this is the classic
/// two-point elimination of the leading `eta^2` error.
fn extrapolated_symbol(diff: f64, etas: &[f64]) -> f64 {
    let z: Vec<f64> = etas.iter().map(|e| e * e).collect();
    let mut vals: Vec<f64> = etas.iter().map(|e| symbol(diff, *e)).collect();
    for level in 1..vals.len() {
        for i in 0..vals.len() - level {
            vals[i] = (z[i + level] * vals[i] - z[i] * vals[i + level]) / (z[i + level] - z[i]);
        }
    }
    vals[0]
}

/// Applies the principal-value inverse of `Lap + lambda^2` to a physical
/// field.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `lambda > 0` and the settings are
/// usable.
/// [`Error::SpaceMismatch`] unless the field is physical.
pub fn apply_pv(lambda: f64, f: &Field, settings: &PvSettings) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    settings.validate()?;
    let grid = f.grid();
    let mut hat = f.to_frequency()?;
    let shell = lambda * lambda;
    match &settings.extrapolate {
        Some(ladder) => {
            for flat in 0..grid.point_count() {
                let diff = shell - grid.freq_norm_sq(flat);
                hat.values_mut()[flat] *= extrapolated_symbol(diff, ladder);
            }
        }
        None => {
            let eta = settings.effective_eta(lambda, grid);
            for flat in 0..grid.point_count() {
                let diff = shell - grid.freq_norm_sq(flat);
                hat.values_mut()[flat] *= symbol(diff, eta);
            }
        }
    }
    hat.to_physical()
}

/// One row of a decay probe: the norm ratio observed at one wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct ProbeRow {
    pub lambda: f64,
    /// `b_star_norm(P f) / b_norm(f)`.
    pub ratio: f64,
    /// Width the settings resolved to at this wavenumber.
    pub eta: f64,
}

/// Decay probe result: per-wavenumber ratios and the fitted log-log slope.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub slope: f64,
}

/// Sweeps `apply_pv` over a wavenumber list and fits the decay rate of
/// `b_star_norm(P f) / b_norm(f)`.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless the list holds at least two increasing
/// positive wavenumbers.  Failures of [`apply_pv`] pass through.
pub fn resolvent_bound_probe(
    lambda_list: &[f64],
    f: &Field,
    settings: &PvSettings,
) -> Result<ProbeReport> {
    if lambda_list.len() < 2 {
        return Err(Error::invalid("decay probe wants at least two wavenumbers"));
    }
    for pair in lambda_list.windows(2) {
        if !(pair[0] > 0.0 && pair[1] > pair[0]) {
            return Err(Error::invalid(format!(
                "wavenumber list must be positive and increasing, got {lambda_list:?}"
            )));
        }
    }
    let denom = b_norm(f)?;
    if denom == 0.0 {
        return Err(Error::invalid("decay probe wants a nonzero field"));
    }
    let mut rows = Vec::with_capacity(lambda_list.len());
    for &lambda in lambda_list {
        let resolved = apply_pv(lambda, f, settings)?;
        rows.push(ProbeRow {
            lambda,
            ratio: b_star_norm(&resolved)? / denom,
            eta: settings.effective_eta(lambda, f.grid()),
        });
    }
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let slope = log_log_slope(&lambdas, &ratios);
    Ok(ProbeReport { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::grid::Space;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lattice_mode(grid: Grid, k: [usize; 2]) -> (Field, f64) {
        let xi = [grid.freq_coord(k[0]), grid.freq_coord(k[1])];
        let f = Field::from_physical_fn(grid, |x| {
            Complex64::from_polar(1.0, x[0] * xi[0] + x[1] * xi[1])
        });
        (f, xi[0] * xi[0] + xi[1] * xi[1])
    }

    fn random_complex(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Field::zeros(grid, Space::Physical);
        for v in f.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        f
    }

    #[test]
    fn settings_validation_catches_bad_ladders() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let f = Field::zeros(g, Space::Physical);
        for bad in [
            PvSettings::fixed(0.0),
            PvSettings::fixed(-1.0),
            PvSettings::grid_tied(0.0),
            PvSettings::fixed(1.0).with_extrapolation(vec![1.0]),
            PvSettings::fixed(1.0).with_extrapolation(vec![0.5, 1.0]),
            PvSettings::fixed(1.0).with_extrapolation(vec![1.0, -0.5]),
        ] {
            assert!(apply_pv(2.0, &f, &bad).is_err(), "accepted {bad:?}");
        }
        assert!(apply_pv(-1.0, &f, &PvSettings::fixed(1e-4)).is_err());
    }

    #[test]
    fn off_shell_mode_divides_by_the_symbol() {
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let (f, s) = lattice_mode(grid, [3, 1]);
        let lambda = 5.0;
        let out = apply_pv(lambda, &f, &PvSettings::fixed(1e-6)).unwrap();
        let want = f.scaled(Complex64::new(1.0 / (lambda * lambda - s), 0.0));
        let err = out.sub(&want).unwrap().max_abs() / want.max_abs();
        assert!(err < 1e-10, "relative error {err}");
    }

    #[test]
    fn on_shell_mode_is_annihilated() {
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let (f, s) = lattice_mode(grid, [4, 0]);
        let lambda = s.sqrt();
        let out = apply_pv(lambda, &f, &PvSettings::fixed(1e-3)).unwrap();
        assert!(out.max_abs() < 1e-12);
        let extrap = apply_pv(
            lambda,
            &f,
            &PvSettings::fixed(1e-3).with_extrapolation(vec![1e-2, 5e-3]),
        )
        .unwrap();
        assert!(extrap.max_abs() < 1e-12);
    }

    #[test]
    fn inverts_the_stationary_operator_off_the_shell() {
        let grid = Grid::new(2, 64, 2.0).unwrap();
        let lambda = 7.0;
        // Band-limited data away from the shell |xi| = 7.
        let modes = [[2usize, 2], [61, 1], [5, 60], [1, 1]];
        let mut f = Field::zeros(grid, Space::Physical);
        for k in modes {
            let (m, s) = lattice_mode(grid, k);
            assert!((s.sqrt() - lambda).abs() > 1.5, "mode too close to shell");
            f.add_scaled_assign(&m, Complex64::new(1.0, 0.5)).unwrap();
        }
        let p = apply_pv(lambda, &f, &PvSettings::fixed(1e-4)).unwrap();
        let mut back = p.spectral_laplacian().unwrap();
        back.add_scaled_assign(&p, Complex64::new(lambda * lambda, 0.0))
            .unwrap();
        let rel = back.sub(&f).unwrap().l2_norm() / f.l2_norm();
        assert!(rel < 1e-6, "identity residual {rel}");
    }

    #[test]
    fn real_fields_stay_real_and_operator_is_self_adjoint() {
        let grid = Grid::new(2, 16, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut f = Field::zeros(grid, Space::Physical);
        for v in f.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        }
        let settings = PvSettings::grid_tied(4.0);
        let out = apply_pv(3.0, &f, &settings).unwrap();
        let imag = out.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(imag < 1e-12, "imaginary leak {imag}");

        let a = random_complex(grid, 11);
        let b = random_complex(grid, 13);
        let pa = apply_pv(3.0, &a, &settings).unwrap();
        let pb = apply_pv(3.0, &b, &settings).unwrap();
        let left = pa.inner(&b).unwrap();
        let right = a.inner(&pb).unwrap();
        let scale = left.norm().max(right.norm());
        assert!((left - right).norm() < 1e-10 * scale);
    }

    #[test]
    fn is_linear() {
        let grid = Grid::new(2, 16, 2.0).unwrap();
        let a = random_complex(grid, 21);
        let b = random_complex(grid, 22);
        let settings = PvSettings::fixed(0.5);
        let lambda = 4.0;
        let ca = Complex64::new(0.3, -1.1);
        let cb = Complex64::new(-0.7, 0.2);
        let mut combo = a.scaled(ca);
        combo.add_scaled_assign(&b, cb).unwrap();
        let lhs = apply_pv(lambda, &combo, &settings).unwrap();
        let mut rhs = apply_pv(lambda, &a, &settings).unwrap().scaled(ca);
        rhs.add_scaled_assign(&apply_pv(lambda, &b, &settings).unwrap(), cb)
            .unwrap();
        let err = lhs.sub(&rhs).unwrap().max_abs() / lhs.max_abs();
        assert!(err < 1e-12);
    }

    #[test]
    fn regularisation_error_shrinks_quadratically_and_extrapolates_away() {
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let (f, s) = lattice_mode(grid, [2, 2]);
        let lambda = 6.0;
        let exact = 1.0 / (lambda * lambda - s);
        let value_at = |settings: &PvSettings| {
            let out = apply_pv(lambda, &f, settings).unwrap();
            // Mode amplitude: the field is exp(i xi.x) scaled by the symbol.
            out.values()[0] / f.values()[0]
        };
        let eta = 2.0;
        let coarse = (value_at(&PvSettings::fixed(eta)).re - exact).abs();
        let fine = (value_at(&PvSettings::fixed(eta / 2.0)).re - exact).abs();
        let order = (coarse / fine).log2();
        assert!(
            (order - 2.0).abs() < 0.1,
            "eta error order {order}, coarse {coarse}, fine {fine}"
        );
        let extrapolated =
            (value_at(&PvSettings::fixed(eta).with_extrapolation(vec![eta, eta / 2.0])).re
                - exact)
                .abs();
        assert!(
            extrapolated < 0.05 * fine,
            "extrapolation left {extrapolated} of {fine}"
        );
    }

    #[test]
    fn probe_ratios_are_homogeneous_and_quarter_per_octave_off_shell() {
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let (f, s) = lattice_mode(grid, [2, 1]);
        let settings = PvSettings::fixed(1e-6);
        let report = resolvent_bound_probe(&[8.0, 16.0, 32.0], &f, &settings).unwrap();
        let scaled = resolvent_bound_probe(&[8.0, 16.0, 32.0], &f.scaled(10.0.into()), &settings)
            .unwrap();
        for (a, b) in report.rows.iter().zip(&scaled.rows) {
            assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
        }
        // One mode far off the shell: the symbol, and hence the ratio,
        // scales like 1/lambda^2.
        for pair in report.rows.windows(2) {
            let drop = pair[1].ratio / pair[0].ratio;
            let symbol_drop = ((pair[1].lambda.powi(2) - s).recip())
                / ((pair[0].lambda.powi(2) - s).recip());
            assert!((drop - symbol_drop).abs() < 0.02 * symbol_drop);
        }
        assert!(report.slope < -1.5, "off-shell slope {}", report.slope);
    }

    #[test]
    fn probe_rejects_bad_sweeps() {
        let grid = Grid::new(2, 16, 2.0).unwrap();
        let f = random_complex(grid, 3);
        let settings = PvSettings::default();
        assert!(resolvent_bound_probe(&[4.0], &f, &settings).is_err());
        assert!(resolvent_bound_probe(&[4.0, 3.0], &f, &settings).is_err());
        assert!(resolvent_bound_probe(&[-1.0, 2.0], &f, &settings).is_err());
    }
}
