//! `propagate`: evolve an initial state under a potential and write the
//! final state with its conservation diagnostics.

use super::GridEcho;
use crate::config::Config;
use crate::{fields, report, Failure};
use serde::Serialize;
use statwave::propagate::{initial_to_final, PropagatorConfig};

#[derive(Serialize)]
struct Report {
    config: String,
    grid: GridEcho,
    potential: String,
    initial: String,
    duration: f64,
    dt: f64,
    steps: usize,
    l2_initial: f64,
    l2_final: f64,
    mass_drift: f64,
    final_max_abs: f64,
    field: String,
}

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let grid = fields::load_grid(cfg)?;
    let potential = fields::load_field(cfg, grid, "potential")?;
    let initial = fields::load_field(cfg, grid, "initial")?;
    let t_final: f64 = cfg.require_parsed("propagate", "T")?;
    let dt: f64 = cfg.require_parsed("propagate", "dt")?;
    let out = report::out_dir(cfg)?;
    cfg.reject_unused()?;

    let stepper = PropagatorConfig::new(t_final, dt)?;
    let evolved = initial_to_final(&potential.field, &initial.field, &stepper)?;

    let l2_initial = initial.field.l2_norm();
    let l2_final = evolved.l2_norm();
    let drift = if l2_initial == 0.0 {
        0.0
    } else {
        (l2_final - l2_initial).abs() / l2_initial
    };

    let path = out.join("final_state.ssfld");
    report::save_field(&evolved, &path)?;
    report::print_json(&Report {
        config: cfg.digest(),
        grid: GridEcho::of(grid),
        potential: potential.summary,
        initial: initial.summary,
        duration: stepper.actual_duration(),
        dt,
        steps: stepper.steps(),
        l2_initial,
        l2_final,
        mass_drift: drift,
        final_max_abs: evolved.max_abs(),
        field: path.display().to_string(),
    })
}
