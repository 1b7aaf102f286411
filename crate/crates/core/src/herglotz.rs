//! Plane-wave superpositions driven by densities on the unit sphere.
//!
//! A wave is synthesised as `E f(x) = sum_m w_m f(theta_m) exp(-i lambda x.theta_m)`
//! over a sphere quadrature.  The densities of interest concentrate on a
//! small cap around a chosen direction, with a parabolic scaling: angular
//! width of order `eps` across the cap, order `eps^2` along it.  Rotations
//! move the cap; the bump profile underneath never changes, which keeps
//! every oracle in the test suite reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Space};
use crate::util::run_indexed;

/// Fraction of the box where residual diagnostics trust the samples.
///
/// The long ramp from here to [`TAPER_ZERO`] is what keeps the spectral
/// Laplacian of a tapered non-periodic field clean on the window; shortening
/// it costs two orders of magnitude of residual at moderate resolutions.
pub const WINDOW_FLAT: f64 = 0.6;
/// Fraction of the box where the measurement taper reaches zero.
pub const TAPER_ZERO: f64 = 0.98;

/// Quadrature nodes and weights on the unit sphere.
///
/// Dimension 2 uses `resolution` equispaced angles with equal weights.
/// Dimension 3 uses Gauss-Legendre nodes in the polar direction crossed
/// with equispaced azimuths, `resolution^2` nodes in total.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    dim: usize,
    resolution: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    /// Ambient dimension (nodes live on the sphere in this dimension).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-direction resolution parameter the quadrature was built with.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the quadrature holds no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Unit vectors; entries past `dim` are zero.
    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    /// Positive weights summing to the sphere area.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Upper bound on the geodesic gap between neighbouring nodes.
    pub fn node_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.resolution as f64
    }
}

/// Builds a sphere quadrature.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `dim` is 2 or 3 and `resolution >= 16`.
pub fn make_quadrature(dim: usize, resolution: usize) -> Result<SphereQuadrature> {
    if !(2..=3).contains(&dim) {
        return Err(Error::invalid(format!(
            "sphere quadrature wants dimension 2 or 3, got {dim}"
        )));
    }
    if resolution < 16 {
        return Err(Error::invalid(format!(
            "sphere quadrature wants resolution >= 16, got {resolution}"
        )));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match dim {
        2 => {
            let w = tau / resolution as f64;
            for m in 0..resolution {
                let phi = tau * m as f64 / resolution as f64;
                nodes.push([phi.cos(), phi.sin(), 0.0]);
                weights.push(w);
            }
        }
        3 => {
            let (polar, polar_w) = gauss_legendre(resolution);
            let azimuth_w = tau / resolution as f64;
            for (t, pw) in polar.iter().zip(&polar_w) {
                let sin_theta = (1.0 - t * t).sqrt();
                for m in 0..resolution {
                    let phi = tau * m as f64 / resolution as f64;
                    nodes.push([sin_theta * phi.cos(), sin_theta * phi.sin(), *t]);
                    weights.push(pw * azimuth_w);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(SphereQuadrature {
        dim,
        resolution,
        nodes,
        weights,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, found by Newton iteration
/// on the recurrence for the Legendre polynomial.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 2, "rule wants at least two nodes");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let dp = m as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

/// Smooth reference bump: `exp(1 - 1/(1 - |4 xi|^2))` inside `|xi| < 1/4`,
/// zero outside.  Values lie in `[0, 1]` with the maximum 1 at the origin.
pub fn bump_chi(xi: &[f64]) -> f64 {
    let q: f64 = xi.iter().map(|c| 16.0 * c * c).sum();
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - q)).exp()
    }
}

/// Orthogonal matrix taking the last coordinate axis to a chosen direction.
#[derive(Debug, Clone)]
pub struct Rotation {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl Rotation {
    /// Identity rotation.
    pub fn identity(dim: usize) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Rotation { dim, m }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies the rotation: `y = Q x`.
    pub fn apply(&self, x: &[f64]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..self.dim {
            for (j, xj) in x.iter().enumerate() {
                y[i] += self.m[i][j] * xj;
            }
        }
        y
    }

    /// Applies the transpose: `y = Q^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..self.dim {
            for (j, xj) in x.iter().enumerate() {
                y[i] += self.m[j][i] * xj;
            }
        }
        y
    }

    /// Image of the last axis, i.e. the direction the cap is centred on.
    pub fn target(&self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.dim - 1] = 1.0;
        self.apply(&e[..self.dim])
    }

    /// Largest entry of `Q^T Q - I`, for orthogonality checks.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut dot = 0.0;
                for k in 0..self.dim {
                    dot += self.m[k][i] * self.m[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }
}

/// Builds the deterministic rotation with `Q e_n = omega`.
///
/// Uses the reflection through the bisector of `e_n` and `omega`; when the
/// two are antipodal the bisector degenerates and the rotation falls back to
/// flipping the last axis.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `omega` has unit length within 1e-10
/// and 2 or 3 entries.
pub fn rotation_to(omega: &[f64]) -> Result<Rotation> {
    let dim = omega.len();
    if !(2..=3).contains(&dim) {
        return Err(Error::invalid(format!(
            "rotation target wants 2 or 3 entries, got {dim}"
        )));
    }
    let len: f64 = omega.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!(
            "rotation target must be a unit vector, |omega| = {len}"
        )));
    }
    let last = dim - 1;
    let mut rot = Rotation::identity(dim);
    if 1.0 + omega[last] < 1e-14 {
        rot.m[last][last] = -1.0;
        return Ok(rot);
    }
    let mut u = [0.0f64; 3];
    for (i, c) in omega.iter().enumerate() {
        u[i] = *c;
    }
    u[last] += 1.0;
    let norm: f64 = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in &mut u {
        *c /= norm;
    }
    for i in 0..dim {
        for j in 0..dim {
            rot.m[i][j] = 2.0 * u[i] * u[j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok(rot)
}

/// Value of the cap density with scale `eps` and orientation `rotation` at a
/// unit vector `theta`.
///
/// The profile is `eps^{-(n-1)} chi(xi'/eps, (xi_n - 1)/eps^2)` evaluated at
/// `xi = Q^T theta`, where `chi` is [`bump_chi`] and `xi'` collects the first
/// `n-1` coordinates.  The support is a cap of angular half-width about
/// `eps/4` around the target direction.
pub fn cap_density_at(eps: f64, rotation: &Rotation, theta: &[f64]) -> f64 {
    let dim = rotation.dim();
    let xi = rotation.apply_transpose(theta);
    let mut arg = [0.0f64; 3];
    for a in 0..dim - 1 {
        arg[a] = xi[a] / eps;
    }
    arg[dim - 1] = (xi[dim - 1] - 1.0) / (eps * eps);
    eps.powi(-(dim as i32 - 1)) * bump_chi(&arg[..dim])
}

/// A nonnegative density sampled on a sphere quadrature.
#[derive(Debug, Clone)]
pub struct SphericalDensity {
    quad: SphereQuadrature,
    values: Vec<f64>,
    eps: f64,
    rotation: Rotation,
}

impl SphericalDensity {
    /// Wraps explicit node values.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] on a length mismatch or a negative value.
    pub fn from_values(
        quad: SphereQuadrature,
        values: Vec<f64>,
        eps: f64,
        rotation: Rotation,
    ) -> Result<SphericalDensity> {
        if values.len() != quad.len() {
            return Err(Error::invalid(format!(
                "density wants {} node values, got {}",
                quad.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "density values must be finite and nonnegative",
            ));
        }
        Ok(SphericalDensity {
            quad,
            values,
            eps,
            rotation,
        })
    }

    /// Constant density `f = 1`, the natural reference for wave oracles.
    pub fn uniform(quad: SphereQuadrature) -> SphericalDensity {
        let dim = quad.dim();
        let values = vec![1.0; quad.len()];
        SphericalDensity {
            quad,
            values,
            eps: 1.0,
            rotation: Rotation::identity(dim),
        }
    }

    /// The quadrature the values are sampled on.
    pub fn quad(&self) -> &SphereQuadrature {
        &self.quad
    }

    /// Node values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cap scale.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Cap orientation.
    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }
}

/// Samples the cap density with scale `eps` and orientation `rotation` on a
/// quadrature.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `0 < eps <= 1` and the rotation matches
/// the quadrature dimension.
/// [`Error::UnderresolvedCap`] when the node spacing exceeds `eps/4`.
pub fn make_density(
    eps: f64,
    rotation: &Rotation,
    quad: &SphereQuadrature,
) -> Result<SphericalDensity> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!(
            "cap scale must lie in (0, 1], got {eps}"
        )));
    }
    if rotation.dim() != quad.dim() {
        return Err(Error::invalid(format!(
            "rotation dimension {} does not match quadrature dimension {}",
            rotation.dim(),
            quad.dim()
        )));
    }
    let spacing = quad.node_spacing();
    let required = eps / 4.0;
    if spacing > required {
        return Err(Error::UnderresolvedCap {
            half_width: eps,
            required,
            actual: spacing,
            nodes: quad.len(),
        });
    }
    let values = quad
        .nodes()
        .iter()
        .map(|theta| cap_density_at(eps, rotation, &theta[..quad.dim()]))
        .collect();
    SphericalDensity::from_values(quad.clone(), values, eps, rotation.clone())
}

/// Quadrature `L1` and `L2` norms of a density.
pub fn density_norms(d: &SphericalDensity) -> (f64, f64) {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (w, v) in d.quad.weights().iter().zip(&d.values) {
        l1 += w * v;
        l2 += w * v * v;
    }
    (l1, l2.sqrt())
}

struct ActiveNode {
    coef: f64,
    axes: Vec<Vec<Complex64>>,
}

/// Synthesises the wave `sum_m w_m f(theta_m) exp(-i lambda x.theta_m)` on
/// every lattice point of `grid`.
///
/// The sum runs only over nodes where the density is nonzero, with per-axis
/// phase tables, so the cost is `O(active nodes * N^n)`.  Points are summed
/// in a fixed node order, which keeps the output independent of the worker
/// count.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `lambda > 0` and the density dimension
/// matches the grid.
/// [`Error::UnderresolvedGrid`] unless `N >= 8 ceil(lambda L / pi)`, the
/// point where the fastest synthesised oscillation keeps 8 samples per
/// period.
pub fn herglotz_wave(lambda: f64, d: &SphericalDensity, grid: Grid) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    let dim = grid.dim();
    if d.quad.dim() != dim {
        return Err(Error::invalid(format!(
            "density dimension {} does not match grid dimension {}",
            d.quad.dim(),
            dim
        )));
    }
    let required = 8 * (lambda * grid.half_width() / std::f64::consts::PI).ceil() as usize;
    if grid.size() < required {
        return Err(Error::UnderresolvedGrid {
            lambda,
            half_width: grid.half_width(),
            required,
            actual: grid.size(),
        });
    }

    let size = grid.size();
    let active: Vec<ActiveNode> = d
        .quad
        .nodes()
        .iter()
        .zip(d.quad.weights())
        .zip(&d.values)
        .filter(|((_, _), v)| **v != 0.0)
        .map(|((theta, w), v)| {
            let axes = (0..dim)
                .map(|a| {
                    (0..size)
                        .map(|j| Complex64::from_polar(1.0, -lambda * grid.coord(j) * theta[a]))
                        .collect()
                })
                .collect();
            ActiveNode { coef: w * v, axes }
        })
        .collect();

    let inner_count = size.pow((dim - 1) as u32);
    let rows = run_indexed(size, |j0| {
        let mut row = vec![Complex64::ZERO; inner_count];
        for node in &active {
            let p0 = node.axes[0][j0].scale(node.coef);
            match dim {
                1 => row[0] += p0,
                2 => {
                    for (slot, phase) in row.iter_mut().zip(&node.axes[1]) {
                        *slot += p0 * phase;
                    }
                }
                3 => {
                    let mut idx = 0;
                    for phase1 in &node.axes[1] {
                        let p01 = p0 * phase1;
                        for phase2 in &node.axes[2] {
                            row[idx] += p01 * phase2;
                            idx += 1;
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        row
    });

    let mut values = Vec::with_capacity(grid.point_count());
    for row in rows {
        values.extend(row);
    }
    Field::from_values(grid, Space::Physical, values)
}

/// Single plane wave `exp(-i lambda x.theta)` on the lattice.
///
/// Shares the resolution rule of [`herglotz_wave`]; the direction need not
/// be a quadrature node.
///
/// # Errors
///
/// Same as [`herglotz_wave`], plus [`Error::InvalidParameter`] for a
/// non-unit direction.
pub fn plane_wave(lambda: f64, theta: &[f64], grid: Grid) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    if theta.len() != grid.dim() {
        return Err(Error::invalid(format!(
            "direction has {} entries, grid dimension is {}",
            theta.len(),
            grid.dim()
        )));
    }
    let len: f64 = theta.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!(
            "direction must be a unit vector, length {len}"
        )));
    }
    let required = 8 * (lambda * grid.half_width() / std::f64::consts::PI).ceil() as usize;
    if grid.size() < required {
        return Err(Error::UnderresolvedGrid {
            lambda,
            half_width: grid.half_width(),
            required,
            actual: grid.size(),
        });
    }
    Ok(Field::from_physical_fn(grid, |x| {
        let mut phase = 0.0;
        for (xa, ta) in x.iter().zip(theta) {
            phase -= lambda * xa * ta;
        }
        Complex64::from_polar(1.0, phase)
    }))
}

/// Direct evaluation of the same sum at one arbitrary point.
pub fn herglotz_wave_at(lambda: f64, d: &SphericalDensity, x: &[f64]) -> Complex64 {
    let dim = d.quad.dim();
    let mut acc = Complex64::ZERO;
    for ((theta, w), v) in d.quad.nodes().iter().zip(d.quad.weights()).zip(&d.values) {
        if *v == 0.0 {
            continue;
        }
        let mut phase = 0.0;
        for a in 0..dim {
            phase -= lambda * x[a] * theta[a];
        }
        acc += Complex64::from_polar(w * v, phase);
    }
    acc
}

/// Interior relative residual of the stationary equation.
///
/// Measures `||(Lap + lambda^2 - V) u|| / (lambda^2 ||u||)` with both norms
/// taken over the box `|x_a| <= 0.75 L`.  The field is multiplied by a
/// smooth taper vanishing before the boundary first, so the spectral
/// Laplacian sees a periodic function; inside the measured window the taper
/// is exactly 1 and does not disturb the equation.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `lambda > 0`.
/// [`Error::SpaceMismatch`] unless the field (and potential) are physical.
pub fn helmholtz_residual(field: &Field, lambda: f64, potential: Option<&Field>) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    let taper = crate::grid::smooth_taper(field.grid(), WINDOW_FLAT, TAPER_ZERO)?;
    let damped = field.mul(&taper)?;
    let mut residual = damped.spectral_laplacian()?;
    residual.add_scaled_assign(&damped, Complex64::new(lambda * lambda, 0.0))?;
    if let Some(v) = potential {
        let coupled = v.mul(&damped)?;
        residual.add_scaled_assign(&coupled, Complex64::new(-1.0, 0.0))?;
    }
    residual.apply_window(WINDOW_FLAT)?;
    let mut windowed = field.clone();
    windowed.apply_window(WINDOW_FLAT)?;
    let denom = lambda * lambda * windowed.l2_norm();
    if denom == 0.0 {
        return Err(Error::invalid(
            "residual is relative to the field, which vanishes on the window",
        ));
    }
    Ok(residual.l2_norm() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    fn bessel_j0(z: f64) -> f64 {
        simpson(|phi| (z * phi.sin()).cos(), 0.0, std::f64::consts::PI, 16384)
            / std::f64::consts::PI
    }

    #[test]
    fn quadrature_integrates_constants_exactly() {
        let tau = 2.0 * std::f64::consts::PI;
        let q2 = make_quadrature(2, 64).unwrap();
        let total: f64 = q2.weights().iter().sum();
        assert!((total - tau).abs() < 1e-12);
        let q3 = make_quadrature(3, 32).unwrap();
        let total: f64 = q3.weights().iter().sum();
        assert!((total - 2.0 * tau).abs() < 1e-12);
        for node in q3.nodes() {
            let len: f64 = node.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_integrates_low_moments() {
        let q2 = make_quadrature(2, 64).unwrap();
        let moment: f64 = q2
            .nodes()
            .iter()
            .zip(q2.weights())
            .map(|(n, w)| w * n[0] * n[0])
            .sum();
        assert!((moment - std::f64::consts::PI).abs() < 1e-12);

        let q3 = make_quadrature(3, 32).unwrap();
        let moment: f64 = q3
            .nodes()
            .iter()
            .zip(q3.weights())
            .map(|(n, w)| w * n[2] * n[2])
            .sum();
        assert!((moment - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_rejects_bad_parameters() {
        assert!(make_quadrature(1, 64).is_err());
        assert!(make_quadrature(4, 64).is_err());
        assert!(make_quadrature(2, 15).is_err());
    }

    #[test]
    fn gauss_legendre_matches_known_integrals() {
        let (nodes, weights) = gauss_legendre(24);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
        let x2: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
        assert!((x2 - 2.0 / 3.0).abs() < 1e-13);
        let x6: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(6)).sum();
        assert!((x6 - 2.0 / 7.0).abs() < 1e-13);
    }

    #[test]
    fn bump_is_one_at_center_and_vanishes_outside() {
        assert_eq!(bump_chi(&[0.0, 0.0]), 1.0);
        assert_eq!(bump_chi(&[0.3, 0.0]), 0.0);
        assert_eq!(bump_chi(&[0.25]), 0.0);
        for xi in [[0.1, 0.05], [0.02, -0.2], [0.12, 0.12]] {
            let v = bump_chi(&xi);
            let mirrored = bump_chi(&[-xi[0], -xi[1]]);
            assert!(v >= 0.0 && v <= 1.0);
            assert_eq!(v, mirrored);
        }
    }

    #[test]
    fn rotations_map_the_axis_to_the_target() {
        for omega in [
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![0.6, 0.8],
            vec![1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
            vec![0.48, 0.6, 0.64],
        ] {
            let rot = rotation_to(&omega).unwrap();
            assert!(rot.orthogonality_defect() < 1e-12);
            let target = rot.target();
            for (a, want) in omega.iter().enumerate() {
                assert!(
                    (target[a] - want).abs() < 1e-12,
                    "target {target:?} vs {omega:?}"
                );
            }
        }
        assert!(rotation_to(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn density_peaks_at_the_cap_center() {
        for omega in [vec![0.6, 0.8], vec![0.48, 0.6, 0.64]] {
            let dim = omega.len();
            let rot = rotation_to(&omega).unwrap();
            let eps = 0.2;
            let center = cap_density_at(eps, &rot, &omega);
            let want = eps.powi(-(dim as i32 - 1));
            assert!(
                (center - want).abs() < 1e-10 * want,
                "center value {center} vs {want}"
            );
        }
    }

    #[test]
    fn density_vanishes_away_from_the_cap() {
        let eps = 0.2;
        let rot = rotation_to(&[0.0, 1.0]).unwrap();
        let quad = make_quadrature(2, 256).unwrap();
        let d = make_density(eps, &rot, &quad).unwrap();
        let target = rot.target();
        for (node, value) in quad.nodes().iter().zip(d.values()) {
            let cosine = node[0] * target[0] + node[1] * target[1];
            let angle = cosine.clamp(-1.0, 1.0).acos();
            if angle > 2.0 * eps {
                assert_eq!(*value, 0.0, "support leaked to angle {angle}");
            }
        }
    }

    #[test]
    fn coarse_quadrature_is_rejected_for_small_caps() {
        let rot = rotation_to(&[0.0, 1.0]).unwrap();
        let quad = make_quadrature(2, 16).unwrap();
        let err = make_density(0.25, &rot, &quad).unwrap_err();
        assert!(matches!(err, Error::UnderresolvedCap { .. }));
    }

    #[test]
    fn density_norms_are_rotation_invariant() {
        let quad = make_quadrature(2, 16384).unwrap();
        let eps = 0.3;
        let a = make_density(eps, &rotation_to(&[0.0, 1.0]).unwrap(), &quad).unwrap();
        let b = make_density(eps, &rotation_to(&[0.731_f64.cos(), 0.731_f64.sin()]).unwrap(), &quad)
            .unwrap();
        let (l1a, l2a) = density_norms(&a);
        let (l1b, l2b) = density_norms(&b);
        assert!((l1a - l1b).abs() < 1e-10 * l1a, "L1 {l1a} vs {l1b}");
        assert!((l2a - l2b).abs() < 1e-10 * l2a, "L2 {l2a} vs {l2b}");
    }

    #[test]
    fn small_cap_l1_matches_the_flat_limit() {
        // As the cap shrinks, the L1 norm tends to the integral of the bump
        // along the parabola eta -> (eta, -|eta|^2/2).
        let oracle = simpson(|eta| bump_chi(&[eta, -eta * eta / 2.0]), -0.25, 0.25, 4096);
        let quad = make_quadrature(2, 4096).unwrap();
        let rot = rotation_to(&[0.0, 1.0]).unwrap();
        let d = make_density(0.05, &rot, &quad).unwrap();
        let (l1, _) = density_norms(&d);
        assert!(
            (l1 - oracle).abs() < 0.02 * oracle,
            "cap L1 {l1} vs flat limit {oracle}"
        );
    }

    #[test]
    fn l2_norm_follows_the_cap_scaling() {
        let quad = make_quadrature(2, 8192).unwrap();
        let rot = rotation_to(&[0.0, 1.0]).unwrap();
        let (_, coarse) = density_norms(&make_density(0.1, &rot, &quad).unwrap());
        let (_, fine) = density_norms(&make_density(0.05, &rot, &quad).unwrap());
        let scaled_coarse = coarse * 0.1f64.sqrt();
        let scaled_fine = fine * 0.05f64.sqrt();
        let drift = (scaled_fine - scaled_coarse).abs() / scaled_coarse;
        assert!(drift < 0.10, "scaled L2 drifted by {drift}");
    }

    #[test]
    fn wave_at_origin_equals_the_density_mass() {
        let quad = make_quadrature(2, 256).unwrap();
        let rot = rotation_to(&[0.6, 0.8]).unwrap();
        let d = make_density(0.4, &rot, &quad).unwrap();
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let wave = herglotz_wave(3.0, &d, grid).unwrap();
        let (l1, _) = density_norms(&d);
        let origin = grid.flat_index(&[16, 16]);
        assert!((wave.values()[origin].re - l1).abs() < 1e-12);
        assert!(wave.values()[origin].im.abs() < 1e-12);
    }

    #[test]
    fn uniform_density_synthesises_a_bessel_profile() {
        let quad = make_quadrature(2, 128).unwrap();
        let d = SphericalDensity::uniform(quad);
        let lambda = 4.0;
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let wave = herglotz_wave(lambda, &d, grid).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        for flat in (0..grid.point_count()).step_by(7) {
            let pos = grid.position(flat);
            let r = (pos[0] * pos[0] + pos[1] * pos[1]).sqrt();
            let want = tau * bessel_j0(lambda * r);
            let got = wave.values()[flat];
            assert!(
                (got.re - want).abs() < 1e-9 && got.im.abs() < 1e-9,
                "at r = {r}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn underresolved_grid_is_rejected() {
        let quad = make_quadrature(2, 256).unwrap();
        let d = make_density(0.4, &rotation_to(&[0.0, 1.0]).unwrap(), &quad).unwrap();
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let err = herglotz_wave(32.0, &d, grid).unwrap_err();
        assert!(matches!(err, Error::UnderresolvedGrid { .. }));
    }

    #[test]
    fn real_densities_give_conjugate_symmetric_waves() {
        let quad = make_quadrature(2, 128).unwrap();
        let d = make_density(0.5, &rotation_to(&[0.6, 0.8]).unwrap(), &quad).unwrap();
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let wave = herglotz_wave(5.0, &d, grid).unwrap();
        let n = grid.size();
        for j0 in 1..n {
            for j1 in 1..n {
                let here = wave.values()[grid.flat_index(&[j0, j1])];
                let there = wave.values()[grid.flat_index(&[n - j0, n - j1])];
                assert!((here - there.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn synthesis_is_linear_in_the_density() {
        let quad = make_quadrature(2, 256).unwrap();
        let rot_a = rotation_to(&[0.0, 1.0]).unwrap();
        let rot_b = rotation_to(&[1.0, 0.0]).unwrap();
        let a = make_density(0.4, &rot_a, &quad).unwrap();
        let b = make_density(0.3, &rot_b, &quad).unwrap();
        let combined: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x + y)
            .collect();
        let both =
            SphericalDensity::from_values(quad.clone(), combined, 0.4, rot_a.clone()).unwrap();
        let grid = Grid::new(2, 32, 1.5).unwrap();
        let lambda = 3.0;
        let sum = herglotz_wave(lambda, &a, grid)
            .unwrap()
            .add(&herglotz_wave(lambda, &b, grid).unwrap())
            .unwrap();
        let direct = herglotz_wave(lambda, &both, grid).unwrap();
        let err = sum.sub(&direct).unwrap().max_abs();
        assert!(err < 1e-12);
    }

    #[test]
    fn rotated_density_waves_are_rotated_waves() {
        let quad = make_quadrature(2, 2048).unwrap();
        let rot = rotation_to(&[0.7f64.cos(), 0.7f64.sin()]).unwrap();
        let base = make_density(0.5, &Rotation::identity(2), &quad).unwrap();
        let turned = make_density(0.5, &rot, &quad).unwrap();
        let grid = Grid::new(2, 32, 2.0).unwrap();
        let lambda = 4.0;
        let wave = herglotz_wave(lambda, &turned, grid).unwrap();
        for flat in (0..grid.point_count()).step_by(11) {
            let pos = grid.position(flat);
            let back = rot.apply_transpose(&pos[..2]);
            let want = herglotz_wave_at(lambda, &base, &back[..2]);
            let got = wave.values()[flat];
            assert!(
                (got - want).norm() < 1e-8,
                "covariance broke at {pos:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn cap_waves_solve_the_free_equation_on_the_window() {
        let quad = make_quadrature(2, 512).unwrap();
        let d = make_density(0.3, &rotation_to(&[0.6, 0.8]).unwrap(), &quad).unwrap();
        let grid = Grid::new(2, 128, 2.0).unwrap();
        let lambda = 8.0;
        let wave = herglotz_wave(lambda, &d, grid).unwrap();
        let residual = helmholtz_residual(&wave, lambda, None).unwrap();
        assert!(residual < 1e-3, "interior residual {residual}");
    }
}
