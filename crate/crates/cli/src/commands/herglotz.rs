//! `herglotz`: synthesize a superposition of plane waves and report its
//! norms and stationary-equation residual.
//!
//! With `eps` and `direction` the density is a parabolic cap aimed along
//! the direction; without them it is uniform over the sphere.  The
//! direction quadrature defaults to enough nodes for both the cap profile
//! and the spatial oscillation, and `resolution` overrides it.

use super::GridEcho;
use crate::config::Config;
use crate::{fields, report, Failure};
use serde::Serialize;
use statwave::herglotz::{
    density_norms, helmholtz_residual, herglotz_wave, make_density, make_quadrature, rotation_to,
    SphericalDensity,
};
use statwave::norms::{b_norm, b_star_norm};
use std::f64::consts::PI;

#[derive(Serialize)]
struct DensityEcho {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<f64>>,
    resolution: usize,
    nodes: usize,
    l1: f64,
    l2: f64,
}

#[derive(Serialize)]
struct Report {
    config: String,
    grid: GridEcho,
    lambda: f64,
    density: DensityEcho,
    b_norm: f64,
    b_star_norm: f64,
    max_abs: f64,
    residual: f64,
    field: String,
}

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let grid = fields::load_grid(cfg)?;
    let lambda: f64 = cfg.require_parsed("herglotz", "lambda")?;
    let eps: Option<f64> = cfg.get_parsed("herglotz", "eps")?;
    let aim = cfg.get("herglotz", "direction").map(str::to_string);
    let resolution: Option<usize> = cfg.get_parsed("herglotz", "resolution")?;
    let out = report::out_dir(cfg)?;
    cfg.reject_unused()?;

    let resolution = resolution.unwrap_or_else(|| default_resolution(grid.dim(), lambda, grid.half_width(), eps));
    let quad = make_quadrature(grid.dim(), resolution)?;
    let (density, kind, direction) = match (eps, aim) {
        (Some(eps), Some(raw)) => {
            let direction = fields::direction(&raw, grid.dim(), "[herglotz] direction")?;
            let rotation = rotation_to(&direction)?;
            (make_density(eps, &rotation, &quad)?, "cap", Some(direction))
        }
        (None, None) => (SphericalDensity::uniform(quad), "uniform", None),
        _ => {
            return Err(Failure::Invalid(
                "[herglotz] eps and direction come together: both for a cap, neither for uniform"
                    .to_string(),
            ))
        }
    };
    let (l1, l2) = density_norms(&density);

    let wave = herglotz_wave(lambda, &density, grid)?;
    let residual = helmholtz_residual(&wave, lambda, None)?;

    let path = out.join("herglotz_wave.ssfld");
    report::save_field(&wave, &path)?;
    report::print_json(&Report {
        config: cfg.digest(),
        grid: GridEcho::of(grid),
        lambda,
        density: DensityEcho {
            kind,
            eps,
            direction,
            resolution,
            nodes: density.quad().len(),
            l1,
            l2,
        },
        b_norm: b_norm(&wave)?,
        b_star_norm: b_star_norm(&wave)?,
        max_abs: wave.max_abs(),
        residual,
        field: path.display().to_string(),
    })
}

/// Nodes enough to resolve the spatial oscillation across the box and, for
/// a cap, its profile.  In three dimensions the count is per axis of the
/// product quadrature, so the oscillation budget is halved.
fn default_resolution(dim: usize, lambda: f64, half_width: f64, eps: Option<f64>) -> usize {
    let bandwidth = lambda.max(1.0) * half_width;
    let oscillation = if dim == 2 {
        (3.0 * bandwidth).ceil() as usize
    } else {
        (1.5 * bandwidth).ceil() as usize
    };
    let floor = if dim == 2 { 64 } else { 16 };
    let cap = eps.map_or(0, |e| (8.0 * PI / e * 1.05).ceil() as usize);
    oscillation.max(floor).max(cap)
}
