//! `resolvent-probe`: sweep the regularized resolvent over a wavenumber
//! list and tabulate the observed norm ratios as CSV.
//!
//! The probe field defaults to a Gaussian four cells wide, narrow enough
//! to have energy near the shell at every listed wavenumber; `[field]`
//! replaces it.

use super::{pv_settings, GridEcho};
use crate::config::Config;
use crate::report::float;
use crate::{fields, report, Failure};
use serde::Serialize;
use statwave::presets;
use statwave::resolvent::resolvent_bound_probe;

#[derive(Serialize)]
struct Report {
    config: String,
    grid: GridEcho,
    field: String,
    slope: f64,
    rows: usize,
    csv: String,
}

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let grid = fields::load_grid(cfg)?;
    let lambdas = cfg.require_f64_list("probe", "lambdas")?;
    let settings = pv_settings(cfg, "probe")?;
    let source = if cfg.has_section("field") {
        fields::load_field(cfg, grid, "field")?
    } else {
        fields::Loaded {
            field: presets::gaussian(grid, 1.0, 4.0 * grid.spacing()),
            summary: format!("gaussian amplitude=1 width={}", 4.0 * grid.spacing()),
        }
    };
    let out = report::out_dir(cfg)?;
    cfg.reject_unused()?;

    let probe = resolvent_bound_probe(&lambdas, &source.field, &settings)?;

    let mut csv = report::Csv::new(
        "resolvent-probe",
        &cfg.digest(),
        &["lambda[1/len]", "ratio[len^2]", "eta[1/len^2]"],
    );
    for row in &probe.rows {
        csv.row(&[float(row.lambda), float(row.ratio), float(row.eta)]);
    }
    let path = out.join("resolvent_probe.csv");
    csv.write(&path)?;

    report::print_json(&Report {
        config: cfg.digest(),
        grid: GridEcho::of(grid),
        field: source.summary,
        slope: probe.slope,
        rows: probe.rows.len(),
        csv: path.display().to_string(),
    })
}
