//! `norms`: the three weighted norms of a potential, as JSON on stdout.

use super::GridEcho;
use crate::config::Config;
use crate::{fields, report, Failure};
use serde::Serialize;
use statwave::norms::{b_norm, b_star_norm, triple_norm};

#[derive(Serialize)]
struct Report {
    config: String,
    grid: GridEcho,
    potential: String,
    triple_norm: f64,
    b_norm: f64,
    b_star_norm: f64,
}

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let grid = fields::load_grid(cfg)?;
    let potential = fields::load_field(cfg, grid, "potential")?;
    cfg.reject_unused()?;

    report::print_json(&Report {
        config: cfg.digest(),
        grid: GridEcho::of(grid),
        potential: potential.summary,
        triple_norm: triple_norm(&potential.field)?,
        b_norm: b_norm(&potential.field)?,
        b_star_norm: b_star_norm(&potential.field)?,
    })
}
