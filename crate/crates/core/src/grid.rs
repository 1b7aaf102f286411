//! Uniform periodic lattice on `[-L, L)^n` and complex fields living on it.
//!
//! Physical samples sit at `x_j = -L + j h` with spacing `h = 2L/N`.
//! Frequency bins follow the unshifted FFT layout: bin `k` along an axis
//! carries the signed index `k' = k` for `k < N/2` and `k' = k - N`
//! otherwise, at frequency `xi = (pi/L) k'`.  The transform pair is
//! normalised so that the discrete Plancherel identity
//! `h^n sum |f|^2 = (pi/L)^n sum |F|^2` holds exactly, and so that the
//! forward transform of a smooth rapidly decaying function converges to
//! `(2 pi)^{-n/2} integral f(x) exp(-i x.xi) dx`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible point count per axis.
pub const MIN_POINTS: usize = 16;

/// Which space a [`Field`]'s samples currently live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Samples on the spatial lattice `x_j = -L + j h`.
    Physical,
    /// Coefficients on the frequency lattice `xi_k = (pi/L) k'`, FFT bin order.
    Frequency,
}

impl Space {
    fn name(self) -> &'static str {
        match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        }
    }
}

/// Cube lattice descriptor: dimension, points per axis, half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    size: usize,
    half_width: f64,
}

impl Grid {
    /// Builds a grid with `size` points per axis on `[-half_width, half_width)^dim`.
    ///
    /// # Errors
    ///
    /// [`Error::BadDimension`] unless `dim` is 1, 2, or 3.
    /// [`Error::OddN`] unless `size` is even and at least [`MIN_POINTS`].
    /// [`Error::InvalidParameter`] unless `half_width` is finite and positive.
    pub fn new(dim: usize, size: usize, half_width: f64) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension { dim });
        }
        if size % 2 != 0 || size < MIN_POINTS {
            return Err(Error::OddN { size });
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::invalid(format!(
                "grid half-width must be finite and positive, got {half_width}"
            )));
        }
        Ok(Grid {
            dim,
            size,
            half_width,
        })
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Domain half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Lattice spacing `h = 2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.size as f64
    }

    /// Frequency spacing `pi/L`.
    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Total number of lattice points `N^n`.
    pub fn point_count(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    /// Physical coordinate of 1-d index `j`.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Signed frequency index of FFT bin `k`.
    pub fn signed_bin(&self, k: usize) -> i64 {
        if k < self.size / 2 {
            k as i64
        } else {
            k as i64 - self.size as i64
        }
    }

    /// Frequency coordinate of FFT bin `k`.
    pub fn freq_coord(&self, k: usize) -> f64 {
        self.freq_spacing() * self.signed_bin(k) as f64
    }

    /// Splits a flat row-major index into per-axis indices.
    ///
    /// Only the first `dim` entries of the returned array are meaningful.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.size;
            rem /= self.size;
        }
        out
    }

    /// Flat row-major index of per-axis indices (last axis fastest).
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.size + multi[a];
        }
        flat
    }

    /// Physical position of a flat index; entries past `dim` are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let multi = self.multi_index(flat);
        let mut out = [0.0f64; 3];
        for a in 0..self.dim {
            out[a] = self.coord(multi[a]);
        }
        out
    }

    /// Frequency vector of a flat bin index; entries past `dim` are zero.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let multi = self.multi_index(flat);
        let mut out = [0.0f64; 3];
        for a in 0..self.dim {
            out[a] = self.freq_coord(multi[a]);
        }
        out
    }

    /// Squared Euclidean length of the frequency vector at a flat bin index.
    pub fn freq_norm_sq(&self, flat: usize) -> f64 {
        let multi = self.multi_index(flat);
        let mut sum = 0.0;
        for a in 0..self.dim {
            let xi = self.freq_coord(multi[a]);
            sum += xi * xi;
        }
        sum
    }

    fn describe(&self) -> String {
        format!(
            "n={} N={} L={}",
            self.dim, self.size, self.half_width
        )
    }
}

/// Complex samples on a [`Grid`], tagged with the space they live in.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(size: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(size, direction))
}

/// In-place 1-d FFTs along every axis of a row-major cube array.
fn fft_all_axes(values: &mut [Complex64], dim: usize, size: usize, direction: FftDirection) {
    let fft = plan(size, direction);
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::ZERO; size];
    for axis in 0..dim {
        let stride = size.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in values.chunks_exact_mut(size) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * size;
        let mut base = 0;
        while base < values.len() {
            for offset in 0..stride {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + offset + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, slot) in line.iter().enumerate() {
                    values[base + offset + i * stride] = *slot;
                }
            }
            base += block;
        }
    }
}

/// Negates entries whose per-axis index sum is odd.
///
/// This is the bin-order form of the `(-1)^{k'}` factor that recentres the
/// DFT onto the symmetric lattice.  Even `size` keeps the parity of a bin
/// index equal to the parity of its signed index.
fn apply_center_signs(values: &mut [Complex64], dim: usize, size: usize) {
    for (flat, v) in values.iter_mut().enumerate() {
        let mut rem = flat;
        let mut parity = 0usize;
        for _ in 0..dim {
            parity ^= rem % size;
            rem /= size;
        }
        if parity & 1 == 1 {
            *v = -*v;
        }
    }
}

impl Field {
    /// All-zero field in the given space.
    pub fn zeros(grid: Grid, space: Space) -> Field {
        Field {
            grid,
            space,
            values: vec![Complex64::ZERO; grid.point_count()],
        }
    }

    /// Physical field sampled from a closure of the position.
    pub fn from_physical_fn<F>(grid: Grid, mut f: F) -> Field
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let mut out = Field::zeros(grid, Space::Physical);
        for flat in 0..grid.point_count() {
            let pos = grid.position(flat);
            out.values[flat] = f(&pos[..grid.dim()]);
        }
        out
    }

    /// Frequency-space field sampled from a closure of the frequency vector.
    pub fn from_frequency_fn<F>(grid: Grid, mut f: F) -> Field
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let mut out = Field::zeros(grid, Space::Frequency);
        for flat in 0..grid.point_count() {
            let xi = grid.frequency(flat);
            out.values[flat] = f(&xi[..grid.dim()]);
        }
        out
    }

    /// Wraps raw samples. `values.len()` must equal `grid.point_count()`.
    pub fn from_values(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.point_count() {
            return Err(Error::invalid(format!(
                "field wants {} samples on this grid, got {}",
                grid.point_count(),
                values.len()
            )));
        }
        Ok(Field {
            grid,
            space,
            values,
        })
    }

    /// The grid the samples live on.
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Space tag.
    pub fn space(&self) -> Space {
        self.space
    }

    /// Read-only view of the samples (row-major, last axis fastest).
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable view of the samples.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    fn want_space(&self, needed: Space) -> Result<()> {
        if self.space != needed {
            return Err(Error::SpaceMismatch {
                needed: needed.name(),
                found: self.space.name(),
            });
        }
        Ok(())
    }

    fn want_same_layout(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.describe(),
                right: other.grid.describe(),
            });
        }
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                needed: self.space.name(),
                found: other.space.name(),
            });
        }
        Ok(())
    }

    /// Forward transform of a physical field.
    ///
    /// Bin `k` of the result approximates
    /// `(2 pi)^{-n/2} integral f(x) exp(-i x.xi_k) dx`.
    ///
    /// # Errors
    ///
    /// [`Error::SpaceMismatch`] if the field is already in frequency space.
    pub fn to_frequency(&self) -> Result<Field> {
        self.want_space(Space::Physical)?;
        let mut out = self.clone();
        fft_all_axes(
            &mut out.values,
            self.grid.dim,
            self.grid.size,
            FftDirection::Forward,
        );
        apply_center_signs(&mut out.values, self.grid.dim, self.grid.size);
        let scale = (2.0 * std::f64::consts::PI).powf(-(self.grid.dim as f64) / 2.0)
            * self.grid.spacing().powi(self.grid.dim as i32);
        for v in &mut out.values {
            *v *= scale;
        }
        out.space = Space::Frequency;
        Ok(out)
    }

    /// Inverse transform of a frequency-space field.
    ///
    /// Exact inverse of [`Field::to_frequency`] up to rounding.
    ///
    /// # Errors
    ///
    /// [`Error::SpaceMismatch`] if the field is already in physical space.
    pub fn to_physical(&self) -> Result<Field> {
        self.want_space(Space::Frequency)?;
        let mut out = self.clone();
        apply_center_signs(&mut out.values, self.grid.dim, self.grid.size);
        fft_all_axes(
            &mut out.values,
            self.grid.dim,
            self.grid.size,
            FftDirection::Inverse,
        );
        let scale = (2.0 * std::f64::consts::PI).powf(-(self.grid.dim as f64) / 2.0)
            * self.grid.freq_spacing().powi(self.grid.dim as i32);
        for v in &mut out.values {
            *v *= scale;
        }
        out.space = Space::Physical;
        Ok(out)
    }

    /// Riemann sum `h^n sum_j f_j` over the whole box.
    ///
    /// # Errors
    ///
    /// [`Error::SpaceMismatch`] unless the field is physical.
    pub fn integrate(&self) -> Result<Complex64> {
        self.want_space(Space::Physical)?;
        let sum: Complex64 = self.values.iter().sum();
        Ok(sum * self.grid.spacing().powi(self.grid.dim as i32))
    }

    /// Discrete `L^2` norm with the natural cell weight of the current space.
    pub fn l2_norm(&self) -> f64 {
        let w = match self.space {
            Space::Physical => self.grid.spacing(),
            Space::Frequency => self.grid.freq_spacing(),
        };
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (w.powi(self.grid.dim as i32) * sum).sqrt()
    }

    /// Largest sample magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Weighted pairing `w^n sum_j f_j conj(g_j)`, second argument conjugated.
    ///
    /// The weight is `h^n` in physical space and `(pi/L)^n` in frequency
    /// space, so the pairing is transform-invariant.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.want_same_layout(other)?;
        let w = match self.space {
            Space::Physical => self.grid.spacing(),
            Space::Frequency => self.grid.freq_spacing(),
        };
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum * w.powi(self.grid.dim as i32))
    }

    /// Zeroes every physical sample with `max_a |x_a|` outside `[-fL, fL)`.
    ///
    /// The cut is half-open on each axis, matching the lattice itself, so the
    /// retained window always covers a whole number of cells.  Idempotent.
    ///
    /// # Errors
    ///
    /// [`Error::SpaceMismatch`] unless the field is physical.
    /// [`Error::InvalidParameter`] unless `0 < fraction <= 1`.
    pub fn apply_window(&mut self, fraction: f64) -> Result<()> {
        self.want_space(Space::Physical)?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "window fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let cut = fraction * self.grid.half_width;
        for flat in 0..self.grid.point_count() {
            let pos = self.grid.position(flat);
            let keep = pos[..self.grid.dim]
                .iter()
                .all(|&x| x >= -cut && x < cut);
            if !keep {
                self.values[flat] = Complex64::ZERO;
            }
        }
        Ok(())
    }

    /// Spectral Laplacian: multiply by `-|xi|^2` in frequency space.
    ///
    /// # Errors
    ///
    /// [`Error::SpaceMismatch`] unless the field is physical.
    pub fn spectral_laplacian(&self) -> Result<Field> {
        let mut hat = self.to_frequency()?;
        for flat in 0..hat.grid.point_count() {
            let s = hat.grid.freq_norm_sq(flat);
            hat.values[flat] *= -s;
        }
        hat.to_physical()
    }

    /// Sum `self + other`.
    pub fn add(&self, other: &Field) -> Result<Field> {
        self.want_same_layout(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(out)
    }

    /// Difference `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.want_same_layout(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        Ok(out)
    }

    /// Pointwise product `self * other` in the shared space.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.want_same_layout(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a *= b;
        }
        Ok(out)
    }

    /// Scalar multiple.
    pub fn scaled(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    /// In-place `self += c * other`.
    pub fn add_scaled_assign(&mut self, other: &Field, c: Complex64) -> Result<()> {
        self.want_same_layout(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }
}

/// Fourier transform of a physical field at an arbitrary frequency vector.
///
/// Direct evaluation of `(2 pi)^{-n/2} h^n sum_j f_j exp(-i x_j.xi)`, which
/// agrees with [`Field::to_frequency`] whenever `xi` lands on a bin.
///
/// # Errors
///
/// [`Error::SpaceMismatch`] unless the field is physical.
/// [`Error::InvalidParameter`] unless `xi.len()` equals the grid dimension.
pub fn fourier_at(field: &Field, xi: &[f64]) -> Result<Complex64> {
    field.want_space(Space::Physical)?;
    let grid = field.grid();
    let dim = grid.dim();
    if xi.len() != dim {
        return Err(Error::invalid(format!(
            "frequency vector has {} entries, grid dimension is {dim}",
            xi.len()
        )));
    }
    let size = grid.size();
    let mut tables = vec![vec![Complex64::ZERO; size]; dim];
    for (a, table) in tables.iter_mut().enumerate() {
        for (j, slot) in table.iter_mut().enumerate() {
            *slot = Complex64::from_polar(1.0, -grid.coord(j) * xi[a]);
        }
    }
    let mut acc = Complex64::ZERO;
    for (flat, v) in field.values().iter().enumerate() {
        let mut rem = flat;
        let mut w = Complex64::ONE;
        for a in (0..dim).rev() {
            w *= tables[a][rem % size];
            rem /= size;
        }
        acc += v * w;
    }
    let scale = (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0)
        * grid.spacing().powi(dim as i32);
    Ok(acc * scale)
}

fn exp_bump(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth ramp: 1 for `t <= 0`, 0 for `t >= 1`, infinitely flat at both ends.
fn ramp_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let down = exp_bump(1.0 - t);
        down / (down + exp_bump(t))
    }
}

/// Separable cutoff that is exactly 1 on the box `|x_a| <= flat_fraction * L`
/// and exactly 0 outside `|x_a| < zero_fraction * L`.
///
/// Every derivative vanishes at both ends of the ramp, so the product is
/// compatible with the periodic extension of the box whenever
/// `zero_fraction < 1`.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `0 < flat_fraction < zero_fraction <= 1`.
pub fn smooth_taper(grid: Grid, flat_fraction: f64, zero_fraction: f64) -> Result<Field> {
    if !(flat_fraction > 0.0 && flat_fraction < zero_fraction && zero_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "taper fractions must satisfy 0 < flat < zero <= 1, got {flat_fraction} and {zero_fraction}"
        )));
    }
    let flat_edge = flat_fraction * grid.half_width();
    let ramp_len = (zero_fraction - flat_fraction) * grid.half_width();
    Ok(Field::from_physical_fn(grid, |x| {
        let mut w = 1.0;
        for &xa in x {
            w *= ramp_down((xa.abs() - flat_edge) / ramp_len);
        }
        Complex64::new(w, 0.0)
    }))
}
