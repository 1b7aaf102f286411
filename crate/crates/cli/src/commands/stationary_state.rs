//! `stationary-state`: solve the fixed-point correction around an incident
//! plane wave and report the solve diagnostics.
//!
//! With `dump_fields = true` the incident wave, the correction, and the
//! full state are written as snapshots next to the JSON record.

use super::{pv_settings, GridEcho};
use crate::config::Config;
use crate::{fields, report, Failure};
use serde::Serialize;
use statwave::herglotz::plane_wave;
use statwave::scatter::solve_correction_with;

#[derive(Serialize)]
struct Report {
    config: String,
    grid: GridEcho,
    potential: String,
    lambda: f64,
    direction: Vec<f64>,
    iterations: usize,
    contraction_ratios: Vec<f64>,
    residual: f64,
    correction_ratio: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<String>,
}

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let grid = fields::load_grid(cfg)?;
    let potential = fields::load_field(cfg, grid, "potential")?;
    let lambda: f64 = cfg.require_parsed("scatter", "lambda")?;
    let raw_direction = cfg
        .get("scatter", "direction")
        .unwrap_or(if grid.dim() == 2 { "1,0" } else { "1,0,0" })
        .to_string();
    let direction = fields::direction(&raw_direction, grid.dim(), "[scatter] direction")?;
    let tol = cfg.parsed_or("scatter", "tol", 1e-8)?;
    let max_iter = cfg.parsed_or("scatter", "max_iter", 200)?;
    let settings = pv_settings(cfg, "scatter")?;
    let dump = cfg.parsed_or("scatter", "dump_fields", false)?;
    let out = report::out_dir(cfg)?;
    cfg.reject_unused()?;

    let incident = plane_wave(lambda, &direction, grid)?;
    let solved = solve_correction_with(&potential.field, lambda, &incident, tol, max_iter, &settings)?;

    let mut artifacts = Vec::new();
    if dump {
        let state = incident.add(&solved.v)?;
        for (name, field) in [
            ("incident.ssfld", &incident),
            ("correction.ssfld", &solved.v),
            ("state.ssfld", &state),
        ] {
            let path = out.join(name);
            report::save_field(field, &path)?;
            artifacts.push(path.display().to_string());
        }
    }

    report::print_json(&Report {
        config: cfg.digest(),
        grid: GridEcho::of(grid),
        potential: potential.summary,
        lambda,
        direction,
        iterations: solved.iterations,
        contraction_ratios: solved.contraction_ratios,
        residual: solved.residual,
        correction_ratio: solved.correction_ratio,
        fields: artifacts,
    })
}
