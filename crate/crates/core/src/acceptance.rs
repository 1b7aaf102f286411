//! The quantitative acceptance battery behind `verify-estimates`.
//!
//! Fourteen checks, one per rate or identity the library claims: decay
//! exponents measured as log-log slopes over `lambda in {8, 16, 32, 64}`,
//! algebraic identities held to fixed tolerances, and convergence orders
//! confirmed by refinement.  Every check builds its own fields, runs at
//! desk scale, and reports a one-line verdict with the measured numbers,
//! so a failure names the quantity that moved.
//!
//! Checks are independent and deterministic: fixed grids, fixed schedules,
//! and a single sample seed (defaulting to [`DEFAULT_SAMPLE_SEED`]) for the
//! one check that draws random fields.  Nothing here touches the file
//! system.

use crate::error::Result;
use crate::grid::{Field, Grid, Space};
use crate::herglotz::{
    bump_chi, helmholtz_residual, herglotz_wave, make_density, make_quadrature, plane_wave,
    rotation_to, SphericalDensity,
};
use crate::norms::{b_norm, b_star_norm, triple_norm};
use crate::presets;
use crate::propagate::{
    discrete_ibp_probe, duhamel_difference_probe, free_gaussian, initial_to_final,
    PropagatorConfig,
};
use crate::recover::{error_envelope, recover_mode, reconstruct, KappaLattice, ModePlan, PlanTemplate, RecoverConfig};
use crate::resolvent::{apply_pv, resolvent_bound_probe, PvSettings};
use crate::scatter::{empirical_threshold, solve_correction};
use crate::util::log_log_slope;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Verdict and measured numbers for one acceptance check.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    /// Position in the battery, starting at 1.
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantities and the bounds they were held to.
    pub detail: String,
}

/// Seed used for the randomized sample when the caller does not supply one.
pub const DEFAULT_SAMPLE_SEED: u64 = 0x0b5e55ed;

enum Check {
    Fixed(fn() -> Result<(bool, String)>),
    Seeded(fn(u64) -> Result<(bool, String)>),
}

const CHECKS: [(&str, Check); 14] = [
    ("herglotz-decay", Check::Fixed(herglotz_decay)),
    ("herglotz-residual", Check::Fixed(herglotz_residual)),
    ("resolvent-identity", Check::Fixed(resolvent_identity)),
    ("resolvent-decay", Check::Fixed(resolvent_decay)),
    ("multiplication-bound", Check::Seeded(multiplication_bound)),
    ("neumann-convergence", Check::Fixed(neumann_convergence)),
    ("correction-decay", Check::Fixed(correction_decay)),
    ("density-asymptotics", Check::Fixed(density_asymptotics)),
    ("split-identity", Check::Fixed(split_identity)),
    ("mode-recovery", Check::Fixed(mode_recovery)),
    ("reconstruction", Check::Fixed(reconstruction)),
    ("propagator", Check::Fixed(propagator)),
    ("duhamel-probe", Check::Fixed(duhamel_probe)),
    ("discrete-ibp", Check::Fixed(discrete_ibp)),
];

/// Number of checks in the battery.
pub fn criterion_count() -> usize {
    CHECKS.len()
}

/// Runs one check by its 1-based position with the default sample seed.
///
/// # Panics
///
/// When `index` is 0 or past the battery.
pub fn run_one(index: usize) -> CriterionOutcome {
    run_one_seeded(index, DEFAULT_SAMPLE_SEED)
}

/// Runs one check, feeding `seed` to the randomized sample if it draws one.
///
/// # Panics
///
/// When `index` is 0 or past the battery.
pub fn run_one_seeded(index: usize, seed: u64) -> CriterionOutcome {
    let (name, check) = &CHECKS[index - 1];
    let result = match check {
        Check::Fixed(run) => run(),
        Check::Seeded(run) => run(seed),
    };
    match result {
        Ok((passed, detail)) => CriterionOutcome {
            index,
            name,
            passed,
            detail,
        },
        Err(e) => CriterionOutcome {
            index,
            name,
            passed: false,
            detail: format!("aborted: {e}"),
        },
    }
}

/// Runs the whole battery in order with the default sample seed.
pub fn run_all() -> Vec<CriterionOutcome> {
    run_all_seeded(DEFAULT_SAMPLE_SEED)
}

/// Runs the whole battery in order with an explicit sample seed.
pub fn run_all_seeded(seed: u64) -> Vec<CriterionOutcome> {
    (1..=CHECKS.len())
        .map(|index| run_one_seeded(index, seed))
        .collect()
}

const SWEEP: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

fn fit_in(value: f64, target: f64, slack: f64) -> bool {
    (value - target).abs() <= slack
}

/// Wave-size slopes for a fixed uniform density: -1/2 in 2-d, -1 in 3-d.
fn herglotz_decay() -> Result<(bool, String)> {
    let slope = |dim: usize, size: usize, half: f64, res: usize| -> Result<f64> {
        let grid = Grid::new(dim, size, half)?;
        let density = SphericalDensity::uniform(make_quadrature(dim, res)?);
        let mut norms = Vec::with_capacity(SWEEP.len());
        for &lambda in &SWEEP {
            norms.push(b_star_norm(&herglotz_wave(lambda, &density, grid)?)?);
        }
        Ok(log_log_slope(&SWEEP, &norms))
    };
    let planar = slope(2, 336, 2.0, 384)?;
    let solid = slope(3, 128, 0.5, 40)?;
    let passed = fit_in(planar, -0.5, 0.15) && fit_in(solid, -1.0, 0.2);
    Ok((
        passed,
        format!("2-d slope {planar:.3} (want -0.5 +/- 0.15), 3-d slope {solid:.3} (want -1.0 +/- 0.2)"),
    ))
}

/// Windowed Helmholtz residual of a synthesized wave at the minimal lattice
/// the resolution rule admits.
fn herglotz_residual() -> Result<(bool, String)> {
    let lambda = 16.0;
    let half = 2.0;
    let minimal = 8 * ((lambda * half) / PI).ceil() as usize;
    let grid = Grid::new(2, minimal, half)?;
    let rotation = rotation_to(&[0.6, 0.8])?;
    let density = make_density(0.3, &rotation, &make_quadrature(2, 512)?)?;
    let wave = herglotz_wave(lambda, &density, grid)?;
    let residual = helmholtz_residual(&wave, lambda, None)?;
    Ok((
        residual <= 1e-3,
        format!("windowed residual {residual:.3e} at N = {minimal} (want <= 1e-3)"),
    ))
}

fn lattice_mode(grid: Grid, k: [usize; 2]) -> (Field, f64) {
    let xi = [grid.freq_coord(k[0]), grid.freq_coord(k[1])];
    let mode = Field::from_physical_fn(grid, |x| {
        Complex64::from_polar(1.0, x[0] * xi[0] + x[1] * xi[1])
    });
    (mode, xi[0] * xi[0] + xi[1] * xi[1])
}

/// `(Laplacian + lambda^2) P f = f` on band-limited data away from the shell.
fn resolvent_identity() -> Result<(bool, String)> {
    let grid = Grid::new(2, 64, 2.0)?;
    let lambda = 7.0;
    let mut f = Field::zeros(grid, Space::Physical);
    for k in [[2usize, 2], [61, 1], [5, 60], [1, 1]] {
        let (mode, s) = lattice_mode(grid, k);
        debug_assert!((s.sqrt() - lambda).abs() > 1.5);
        f.add_scaled_assign(&mode, Complex64::new(1.0, 0.5))?;
    }
    let p = apply_pv(lambda, &f, &PvSettings::fixed(1e-4))?;
    let mut back = p.spectral_laplacian()?;
    back.add_scaled_assign(&p, Complex64::new(lambda * lambda, 0.0))?;
    let rel = back.sub(&f)?.l2_norm() / f.l2_norm();
    Ok((
        rel <= 1e-6,
        format!("off-shell identity residual {rel:.3e} (want <= 1e-6)"),
    ))
}

/// Principal-value gain `b_star(P f) / b(f)` falls like 1/lambda.
fn resolvent_decay() -> Result<(bool, String)> {
    let grid = Grid::new(2, 384, 2.0)?;
    let f = presets::gaussian(grid, 1.0, 4.0 * grid.spacing());
    let report = resolvent_bound_probe(&SWEEP, &f, &PvSettings::default())?;
    Ok((
        fit_in(report.slope, -1.0, 0.2),
        format!("gain slope {:.3} (want -1.0 +/- 0.2)", report.slope),
    ))
}

fn random_field(rng: &mut ChaCha8Rng, grid: Grid) -> Field {
    let mut f = Field::zeros(grid, Space::Physical);
    for v in f.values_mut() {
        *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    f
}

/// `b(V u) <= |||V||| b_star(u)`, seeded random pairs, zero violations.
fn multiplication_bound(seed: u64) -> Result<(bool, String)> {
    let grid = Grid::new(2, 64, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut largest = 0.0f64;
    for _ in 0..100 {
        let v = random_field(&mut rng, grid);
        let u = random_field(&mut rng, grid);
        let left = b_norm(&v.mul(&u)?)?;
        let right = triple_norm(&v)? * b_star_norm(&u)?;
        largest = largest.max(left / right);
        if left > right * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations over 100 random pairs, largest ratio {largest:.6}"),
    ))
}

/// The correction series contracts and lands on a small PDE residual once
/// the wavenumber clears the empirical coupling threshold.
fn neumann_convergence() -> Result<(bool, String)> {
    let mut grid = Grid::new(2, 128, 2.0)?;
    let mut potential = presets::gaussian(grid, 0.5, 0.3);
    let threshold = empirical_threshold(&potential, 16.0, &PvSettings::default())?;
    let lambda = (4.0 * threshold).max(16.0);
    let needed = 8 * ((lambda * grid.half_width()) / PI).ceil() as usize;
    if grid.size() < needed {
        grid = Grid::new(2, needed + needed % 2, 2.0)?;
        potential = presets::gaussian(grid, 0.5, 0.3);
    }
    let incident = plane_wave(lambda, &[1.0, 0.0], grid)?;
    let solved = solve_correction(&potential, lambda, &incident, 1e-8, 200)?;
    let worst = solved.contraction_ratios.iter().cloned().fold(0.0, f64::max);
    let passed = worst < 1.0 && solved.residual <= 1e-3;
    Ok((
        passed,
        format!(
            "threshold {threshold:.3}, lambda {lambda}, worst ratio {worst:.3} (want < 1), residual {:.3e} (want <= 1e-3), {} iterations",
            solved.residual, solved.iterations
        ),
    ))
}

/// The relative correction size `b_star(v) / b_star(u)` falls like 1/lambda.
fn correction_decay() -> Result<(bool, String)> {
    let grid = Grid::new(2, 336, 2.0)?;
    let potential = presets::gaussian(grid, 0.5, 0.3);
    let mut ratios = Vec::with_capacity(SWEEP.len());
    for &lambda in &SWEEP {
        let incident = plane_wave(lambda, &[1.0, 0.0], grid)?;
        ratios.push(solve_correction(&potential, lambda, &incident, 1e-8, 200)?.correction_ratio);
    }
    let slope = log_log_slope(&SWEEP, &ratios);
    Ok((
        fit_in(slope, -1.0, 0.2),
        format!("correction slope {slope:.3} (want -1.0 +/- 0.2)"),
    ))
}

/// Small-cap limit of the line mass of the cap profile, by composite
/// Simpson over the support.
fn cap_profile_line_mass() -> f64 {
    let intervals = 4096usize;
    let a = -0.25;
    let h = 0.5 / intervals as f64;
    let f = |eta: f64| bump_chi(&[eta, -eta * eta / 2.0]);
    let mut acc = f(a) + f(a + 0.5);
    for i in 1..intervals {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Cap-density norms: the L1 mass approaches its small-cap limit, the L2
/// norm scales like a half power of the cap size, and both are blind to
/// the cap direction.
fn density_asymptotics() -> Result<(bool, String)> {
    let oracle = cap_profile_line_mass();
    let quad = make_quadrature(2, 65536)?;
    let north = rotation_to(&[0.0, 1.0])?;
    let (l1_fine, l2_fine) = crate::herglotz::density_norms(&make_density(0.05, &north, &quad)?);
    let (_, l2_coarse) = crate::herglotz::density_norms(&make_density(0.1, &north, &quad)?);
    let mass_err = (l1_fine - oracle).abs() / oracle;
    let scaled_fine = l2_fine * 0.05f64.sqrt();
    let scaled_coarse = l2_coarse * 0.1f64.sqrt();
    let scale_drift = (scaled_coarse - scaled_fine).abs() / scaled_fine;
    let mut rotation_drift = 0.0f64;
    for angle in [0.7f64, -2.1] {
        let tilted = rotation_to(&[angle.cos(), angle.sin()])?;
        let (l1, l2) = crate::herglotz::density_norms(&make_density(0.05, &tilted, &quad)?);
        rotation_drift = rotation_drift
            .max((l1 - l1_fine).abs() / l1_fine)
            .max((l2 - l2_fine).abs() / l2_fine);
    }
    let passed = mass_err <= 0.02 && scale_drift < 0.10 && rotation_drift <= 1e-10;
    Ok((
        passed,
        format!(
            "mass error {mass_err:.4} (want <= 0.02), scaled-L2 drift {scale_drift:.4} (want < 0.10), rotation drift {rotation_drift:.2e} (want <= 1e-10)"
        ),
    ))
}

/// The leading term and the remainder add back to the full pairing, and
/// the remainder is subordinate at high wavenumber.
fn split_identity() -> Result<(bool, String)> {
    let grid = Grid::new(2, 192, 2.0)?;
    let v1 = presets::gaussian(grid, 0.5, 0.3);
    let v2 = presets::zero(grid);
    let plan = ModePlan::new(vec![1.0, 0.0], vec![8.0, 16.0, 32.0])?;
    let estimate = recover_mode(&v1, &v2, &plan, &RecoverConfig::default())?;
    let mut worst_split = 0.0f64;
    for row in &estimate.rows {
        let defect = (row.leading + row.remainder - row.pairing).norm();
        worst_split = worst_split.max(defect / row.pairing.norm().max(f64::MIN_POSITIVE));
    }
    let last = estimate.rows.last().expect("nonempty schedule");
    let subordination = last.remainder.norm() / last.leading.norm();
    let passed = worst_split <= 1e-10 && subordination <= 0.1;
    Ok((
        passed,
        format!(
            "split defect {worst_split:.2e} (want <= 1e-10), remainder/leading {subordination:.3} at lambda 32 (want <= 0.1)"
        ),
    ))
}

/// Frequency estimates walk down to the analytic transform as the
/// wavenumber schedule climbs, and stay under the reported envelope.
fn mode_recovery() -> Result<(bool, String)> {
    let grid = Grid::new(2, 336, 2.0)?;
    let v1 = presets::gaussian(grid, 0.5, 0.3);
    let v2 = presets::zero(grid);
    let config = RecoverConfig::default();
    let kappas: [[f64; 2]; 5] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0]];
    let mut worst_final = 0.0f64;
    let mut all_decreasing = true;
    let mut all_covered = true;
    let mut finals = Vec::with_capacity(kappas.len());
    for kappa in kappas {
        let plan = ModePlan::new(kappa.to_vec(), SWEEP.to_vec())?;
        let estimate = recover_mode(&v1, &v2, &plan, &config)?;
        let truth = presets::gaussian_fourier_at(0.5, 0.3, &kappa);
        let errors: Vec<f64> = estimate
            .rows
            .iter()
            .map(|row| (row.estimate - truth).norm())
            .collect();
        // The last two levels read off the discretization floor; decrease
        // is enforced only above that band, where the quadrature noise of
        // the cap pairings does not yet dominate.
        let tail = errors[errors.len() - 2].max(errors[errors.len() - 1]);
        let floor_band = 1.5 * tail;
        for pair in errors.windows(2) {
            if pair[1] > pair[0] * 1.05 && pair[0] > floor_band {
                all_decreasing = false;
            }
        }
        if errors[errors.len() - 1] > errors[0] * 1.05 {
            all_decreasing = false;
        }
        let final_rel = errors[errors.len() - 1] / truth.norm();
        worst_final = worst_final.max(final_rel);
        finals.push(final_rel);
        all_covered &= error_envelope(&estimate, &v1)?.all_under;
    }
    let passed = worst_final <= 0.10 && all_decreasing && all_covered;
    let shown: Vec<String> = finals.iter().map(|e| format!("{e:.1e}")).collect();
    Ok((
        passed,
        format!(
            "final relative errors [{}] (want <= 0.10), decreasing {all_decreasing}, under envelope {all_covered}",
            shown.join(", ")
        ),
    ))
}

/// Lattice inversion of the Gaussian pair, and exact cancellation for an
/// identical pair.
fn reconstruction() -> Result<(bool, String)> {
    let grid = Grid::new(2, 144, 2.0)?;
    let v1 = presets::gaussian(grid, 0.5, 0.3);
    let v2 = presets::zero(grid);
    let lattice = KappaLattice {
        per_axis: 17,
        max_abs: 12.0,
    };
    let config = RecoverConfig::default();
    let rec = reconstruct(&v1, &v2, &lattice, &PlanTemplate::default(), &config)?;
    let rel = rec.relative_error();

    let small_grid = Grid::new(2, 96, 2.0)?;
    let same = presets::gaussian(small_grid, 0.5, 0.3);
    let small_lattice = KappaLattice {
        per_axis: 9,
        max_abs: 8.0,
    };
    let cancel = reconstruct(&same, &same, &small_lattice, &PlanTemplate::default(), &config)?;
    let residue = cancel.field.l2_norm() / same.l2_norm();
    let passed = rel <= 0.15 && rec.modes_solved == 145 && residue <= 1e-8;
    Ok((
        passed,
        format!(
            "relative L2 error {rel:.3} over {} modes (want <= 0.15), identical-pair residue {residue:.2e} (want <= 1e-8)",
            rec.modes_solved
        ),
    ))
}

/// Free dispersion against the closed form, mass conservation, and the
/// second-order refinement of the splitting.
fn propagator() -> Result<(bool, String)> {
    let wide = Grid::new(2, 256, 8.0)?;
    let spread = initial_to_final(
        &presets::zero(wide),
        &free_gaussian(wide, 1.0, 0.0),
        &PropagatorConfig::new(0.5, 1e-3)?,
    )?;
    let exact = free_gaussian(wide, 1.0, 0.5);
    let dispersion = spread.sub(&exact)?.l2_norm() / exact.l2_norm();

    let grid = Grid::new(2, 64, 8.0)?;
    let potential = presets::gaussian(grid, 0.5, 1.0);
    let packet = free_gaussian(grid, 1.0, 0.0);
    let evolved = initial_to_final(&potential, &packet, &PropagatorConfig::new(1.0, 1e-3)?)?;
    let drift = (evolved.l2_norm() - packet.l2_norm()).abs() / packet.l2_norm();

    let reference = initial_to_final(&potential, &packet, &PropagatorConfig::new(0.2, 2.5e-4)?)?;
    let mut errors = Vec::new();
    for dt in [2e-3, 1e-3] {
        let run = initial_to_final(&potential, &packet, &PropagatorConfig::new(0.2, dt)?)?;
        errors.push(run.sub(&reference)?.l2_norm() / reference.l2_norm());
    }
    let order = (errors[0] / errors[1]).log2();
    let passed = dispersion <= 1e-4 && drift <= 1e-10 && fit_in(order, 2.0, 0.2);
    Ok((
        passed,
        format!(
            "dispersion error {dispersion:.2e} (want <= 1e-4), mass drift {drift:.2e} over 1000 steps (want <= 1e-10), refinement order {order:.2} (want 2.0 +/- 0.2)"
        ),
    ))
}

/// Difference-pairing agreement for a weak potential, second-order decay
/// of the gap, and exact zeros for an identical pair.
fn duhamel_probe() -> Result<(bool, String)> {
    let grid = Grid::new(2, 64, 8.0)?;
    let potential = presets::gaussian(grid, 1e-2, 1.0);
    let nothing = presets::zero(grid);
    let f = free_gaussian(grid, 1.0, 0.0);
    let g = Field::from_physical_fn(grid, |x| {
        Complex64::new(-((x[0] - 0.5).powi(2) + x[1] * x[1]) / 2.0, 0.0).exp()
    });
    let coarse =
        duhamel_difference_probe(&potential, &nothing, &f, &g, &PropagatorConfig::new(0.1, 2e-3)?)?;
    let fine =
        duhamel_difference_probe(&potential, &nothing, &f, &g, &PropagatorConfig::new(0.1, 1e-3)?)?;
    let gap_coarse = (coarse.evolution_side - coarse.pairing_side).norm();
    let gap_fine = (fine.evolution_side - fine.pairing_side).norm();
    let ratio = gap_coarse / gap_fine;
    let same =
        duhamel_difference_probe(&potential, &potential, &f, &g, &PropagatorConfig::new(0.1, 2e-3)?)?;
    let exact_zero =
        same.evolution_side == Complex64::ZERO && same.pairing_side == Complex64::ZERO;
    let passed = coarse.discrepancy <= 5e-2 && (3.2..=4.8).contains(&ratio) && exact_zero;
    Ok((
        passed,
        format!(
            "normalized gap {:.2e} (want <= 5e-2), halving ratio {ratio:.2} (want 4.0 +/- 20%), identical-pair zeros {exact_zero}",
            coarse.discrepancy
        ),
    ))
}

fn ibp_series(grid: Grid, steps: usize, dt: f64) -> (Vec<Field>, Vec<Field>) {
    let t_total = steps as f64 * dt;
    let packet = free_gaussian(grid, 1.0, 0.0);
    let other = Field::from_physical_fn(grid, |x| {
        Complex64::new(0.0, x[0] * PI / 4.0).exp()
            * Complex64::new(-(x[0] * x[0] + x[1] * x[1]) / 4.0, 0.0).exp()
    });
    let ramp = |t: f64| (PI * t / t_total).sin().powi(4);
    let u = (0..=steps)
        .map(|k| packet.scaled(Complex64::new(ramp(k as f64 * dt), 0.0)))
        .collect();
    let v = (0..=steps)
        .map(|k| other.scaled(Complex64::new(0.0, 0.3 * k as f64 * dt).exp()))
        .collect();
    (u, v)
}

/// Centered-difference summation by parts on endpoint-vanishing data.
fn discrete_ibp() -> Result<(bool, String)> {
    let grid = Grid::new(2, 32, 4.0)?;
    let (u, v) = ibp_series(grid, 100, 1e-3);
    let coarse = discrete_ibp_probe(&u, &v, 1e-3)?;
    let (u2, v2) = ibp_series(grid, 200, 5e-4);
    let fine = discrete_ibp_probe(&u2, &v2, 5e-4)?;
    let ratio = coarse / fine;
    let passed = coarse <= 1e-6 && ratio >= 3.2;
    Ok((
        passed,
        format!(
            "discrepancy {coarse:.2e} at dt 1e-3 (want <= 1e-6), halving ratio {ratio:.1} (want >= 3.2)"
        ),
    ))
}
