//! Time evolution of `i du/dt = -Lap u + V u` by Strang splitting, plus
//! time-domain probes of the duality structure linking the evolution map
//! to the stationary pairing.
//!
//! Each Strang step multiplies frequency data by `exp(-i |xi|^2 dt / 2)`,
//! physical data by `exp(-i V dt)`, then repeats the free half-step.  Every
//! sub-step has a unit-modulus multiplier when `V` is real, so the discrete
//! map is unitary to rounding no matter how coarse `dt` is.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Space};
use crate::herglotz::WINDOW_FLAT;
use num_complex::Complex64;

/// Timing of a propagation run.
#[derive(Debug, Clone, Copy)]
pub struct PropagatorConfig {
    /// Requested final time.
    pub t_final: f64,
    /// Time step.
    pub dt: f64,
}

impl PropagatorConfig {
    pub fn new(t_final: f64, dt: f64) -> Result<PropagatorConfig> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::invalid(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let cfg = PropagatorConfig { t_final, dt };
        if cfg.steps() == 0 {
            return Err(Error::invalid(format!(
                "final time {t_final} is shorter than half a step {dt}"
            )));
        }
        Ok(cfg)
    }

    /// Step count, rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// The time actually integrated, `steps * dt`.
    pub fn actual_duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }
}

/// Per-step multiplier tables for one (grid, potential, dt) combination.
struct StrangTables {
    grid: Grid,
    half_free: Vec<Complex64>,
    full_free: Vec<Complex64>,
    phase: Vec<Complex64>,
}

impl StrangTables {
    fn new(potential: &Field, dt: f64) -> Result<StrangTables> {
        if potential.space() != Space::Physical {
            return Err(Error::SpaceMismatch {
                needed: "physical",
                found: "frequency",
            });
        }
        let grid = potential.grid();
        let half_free = (0..grid.point_count())
            .map(|i| Complex64::new(0.0, -grid.freq_norm_sq(i) * dt / 2.0).exp())
            .collect::<Vec<_>>();
        let full_free = half_free.iter().map(|m| m * m).collect();
        let phase = potential
            .values()
            .iter()
            .map(|v| (Complex64::new(0.0, -dt) * v).exp())
            .collect();
        Ok(StrangTables {
            grid,
            half_free,
            full_free,
            phase,
        })
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: format!("{:?}", self.grid),
                right: format!("{:?}", f.grid()),
            });
        }
        if f.space() != Space::Physical {
            return Err(Error::SpaceMismatch {
                needed: "physical",
                found: "frequency",
            });
        }
        Ok(())
    }

    /// Runs `steps` Strang steps, fusing adjacent free half-steps.
    fn run(&self, f: &Field, steps: usize) -> Result<Field> {
        self.check(f)?;
        if steps == 0 {
            return Ok(f.clone());
        }
        let mut freq = f.to_frequency()?;
        multiply(&mut freq, &self.half_free);
        for step in 0..steps {
            let mut phys = freq.to_physical()?;
            multiply(&mut phys, &self.phase);
            freq = phys.to_frequency()?;
            multiply(
                &mut freq,
                if step + 1 == steps {
                    &self.half_free
                } else {
                    &self.full_free
                },
            );
        }
        freq.to_physical()
    }
}

fn multiply(field: &mut Field, table: &[Complex64]) {
    for (v, m) in field.values_mut().iter_mut().zip(table) {
        *v *= m;
    }
}

/// Evolves `f` to time `cfg.actual_duration()` under the potential.
pub fn initial_to_final(potential: &Field, f: &Field, cfg: &PropagatorConfig) -> Result<Field> {
    let cfg = PropagatorConfig::new(cfg.t_final, cfg.dt)?;
    StrangTables::new(potential, cfg.dt)?.run(f, cfg.steps())
}

/// Closed-form free evolution of the packet `exp(-|x|^2 / (2 sigma0^2))`.
pub fn free_gaussian(grid: Grid, sigma0: f64, t: f64) -> Field {
    let a = Complex64::new(sigma0 * sigma0, 2.0 * t);
    let amp = (Complex64::new(sigma0 * sigma0, 0.0) / a).powf(grid.dim() as f64 / 2.0);
    Field::from_physical_fn(grid, |x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        amp * (Complex64::new(-r2, 0.0) / (2.0 * a)).exp()
    })
}

/// How far a stationary state drifts from pure phase rotation under the
/// full time stepper.
///
/// Propagates `w` under the potential and reports, after every step, the
/// interior-window relative deviation from `exp(-i lambda^2 t) w`.
pub fn stationary_phase_probe(
    potential: &Field,
    lambda: f64,
    w: &Field,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "wavenumber must be positive, got {lambda}"
        )));
    }
    if steps == 0 {
        return Err(Error::invalid("probe needs at least one step"));
    }
    let tables = StrangTables::new(potential, dt)?;
    tables.check(w)?;
    let mut reference = w.clone();
    reference.apply_window(WINDOW_FLAT)?;
    let scale = reference.l2_norm();
    if scale == 0.0 {
        return Err(Error::invalid("state vanishes on the interior window"));
    }

    let mut u = w.clone();
    let mut deviations = Vec::with_capacity(steps);
    for step in 1..=steps {
        u = tables.run(&u, 1)?;
        let phase = Complex64::new(0.0, -lambda * lambda * dt * step as f64).exp();
        let mut diff = u.sub(&w.scaled(phase))?;
        diff.apply_window(WINDOW_FLAT)?;
        deviations.push(diff.l2_norm() / scale);
    }
    Ok(deviations)
}

/// Both sides of the evolution-difference / stationary-pairing bridge.
#[derive(Debug, Clone, Copy)]
pub struct DuhamelReport {
    /// `<(U1 - U2) f, g>` at the final time.
    pub evolution_side: Complex64,
    /// `-i * integral of <(V1 - V2) u1(t), v2(t)> dt` over the run.
    pub pairing_side: Complex64,
    /// `|A - B| / (|A| + |B|)`, zero when both sides vanish.
    pub discrepancy: f64,
}

/// Compares `<(U1 - U2) f, g>` against the time-integrated pairing of the
/// potential difference with the two evolutions.
///
/// `u1` propagates forward from `f` under `V1`.  The dual state `v2` solves
/// `i dv/dt = -Lap v + conj(V2) v` with final data `g`; unwinding that
/// backward run turns it into a forward propagation of `conj(g)` under
/// `V2`, which is what the implementation marches.  The time integral uses
/// the trapezoid rule on the shared step grid, so the comparison carries
/// the scheme's own `O(dt^2)` error.  Memory scales with `steps + 1`
/// stored slices.
pub fn duhamel_difference_probe(
    v1: &Field,
    v2: &Field,
    f: &Field,
    g: &Field,
    cfg: &PropagatorConfig,
) -> Result<DuhamelReport> {
    let cfg = PropagatorConfig::new(cfg.t_final, cfg.dt)?;
    let steps = cfg.steps();
    let grid = v1.grid();
    let difference = v1.sub(v2)?;

    let tables1 = StrangTables::new(v1, cfg.dt)?;
    let tables2 = StrangTables::new(v2, cfg.dt)?;
    tables1.check(f)?;
    tables1.check(g)?;

    // Both evolutions march one step at a time so identical potentials
    // cancel exactly, rounding included.
    let mut forward = Vec::with_capacity(steps + 1);
    forward.push(f.clone());
    let mut u2_final = f.clone();
    for _ in 0..steps {
        let next = tables1.run(forward.last().unwrap(), 1)?;
        forward.push(next);
        u2_final = tables2.run(&u2_final, 1)?;
    }

    let u1_final = forward.last().unwrap();
    let evolution_side = u1_final.sub(&u2_final)?.inner(g)?;

    // y(tau) = U^{V2}_tau [conj g]; then v2(t) = conj(y(T - t)) and
    // <F u1(t), v2(t)> = h^n sum F u1(t) y(T - t), a plain bilinear sum.
    let cell = grid.spacing().powi(grid.dim() as i32);
    let mut y = Field::from_values(grid, Space::Physical, g.values().iter().map(|v| v.conj()).collect())?;
    let mut integral = Complex64::ZERO;
    for j in 0..=steps {
        if j > 0 {
            y = tables2.run(&y, 1)?;
        }
        let u1 = &forward[steps - j];
        let mut slice = Complex64::ZERO;
        for ((fv, uv), yv) in difference.values().iter().zip(u1.values()).zip(y.values()) {
            slice += fv * uv * yv;
        }
        let weight = if j == 0 || j == steps { 0.5 } else { 1.0 };
        integral += weight * cell * slice;
    }
    let pairing_side = Complex64::new(0.0, -1.0) * integral * cfg.dt;

    let denom = evolution_side.norm() + pairing_side.norm();
    let discrepancy = if denom == 0.0 {
        0.0
    } else {
        (evolution_side - pairing_side).norm() / denom
    };
    Ok(DuhamelReport {
        evolution_side,
        pairing_side,
        discrepancy,
    })
}

/// Discrepancy of the discrete space-time integration-by-parts identity
/// `sum <(i d/dt + Lap) u, v> = sum <u, (i d/dt + Lap) v>` with centered
/// time differences, scaled by `dt * h^n`.
///
/// The first and last samples of `u` must vanish; only interior times
/// enter the sums.
pub fn discrete_ibp_probe(u: &[Field], v: &[Field], dt: f64) -> Result<f64> {
    if u.len() != v.len() || u.len() < 3 {
        return Err(Error::invalid(format!(
            "need matching sequences of at least 3 samples, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let scale = u.iter().map(Field::max_abs).fold(0.0, f64::max);
    let boundary = u[0].max_abs().max(u[u.len() - 1].max_abs());
    if boundary > 1e-12 * scale {
        return Err(Error::invalid(format!(
            "first and last samples of u must vanish, boundary magnitude {boundary:e}"
        )));
    }
    let grid = u[0].grid();
    let last = u.len() - 1;

    let mut left = Complex64::ZERO;
    let mut right = Complex64::ZERO;
    for k in 1..last {
        let du = u[k + 1].sub(&u[k - 1])?.scaled(Complex64::new(0.0, 0.5 / dt));
        let dv = v[k + 1].sub(&v[k - 1])?.scaled(Complex64::new(0.0, 0.5 / dt));
        let lu = u[k].spectral_laplacian()?;
        let lv = v[k].spectral_laplacian()?;
        for ((a, b), w) in du.values().iter().zip(lu.values()).zip(v[k].values()) {
            left += (a + b) * w.conj();
        }
        for ((a, b), w) in dv.values().iter().zip(lv.values()).zip(u[k].values()) {
            right += w * (a + b).conj();
        }
    }
    Ok((left - right).norm() * dt * grid.spacing().powi(grid.dim() as i32))
}
