//! Turns config sections into grids and fields.
//!
//! A field section holds either `preset = gaussian|bump|dyadic|zero` with
//! its parameters or `path = file.ssfld`; the two are mutually exclusive.
//! Loaded snapshots must sit on the grid the config declares, so every
//! command works on one lattice.

use crate::config::Config;
use crate::Failure;
use statwave::field_io;
use statwave::presets::{self, PresetKind};
use statwave::{Field, Grid};

pub fn load_grid(cfg: &Config) -> Result<Grid, Failure> {
    let n = cfg.require_parsed::<usize>("grid", "n")?;
    let size = cfg.require_parsed::<usize>("grid", "N")?;
    let half = cfg.require_parsed::<f64>("grid", "L")?;
    Ok(Grid::new(n, size, half)?)
}

/// A resolved field plus the one-line description echoed in reports.
pub struct Loaded {
    pub field: Field,
    pub summary: String,
}

pub fn load_field(cfg: &Config, grid: Grid, section: &str) -> Result<Loaded, Failure> {
    match (cfg.get(section, "path"), cfg.get(section, "preset")) {
        (Some(path), None) => {
            let path = path.to_string();
            let field = field_io::load_field(std::path::Path::new(&path))?;
            if field.grid() != grid {
                return Err(Failure::Invalid(format!(
                    "[{section}] {path}: snapshot grid {:?} does not match the [grid] section",
                    field.grid()
                )));
            }
            Ok(Loaded {
                field,
                summary: format!("file {path}"),
            })
        }
        (None, Some(_)) => load_preset(cfg, grid, section),
        (Some(_), Some(_)) => Err(Failure::Invalid(format!(
            "[{section}] sets both `preset` and `path`; pick one"
        ))),
        (None, None) => Err(Failure::Invalid(format!(
            "[{section}] needs `preset = ...` or `path = file.ssfld`"
        ))),
    }
}

fn load_preset(cfg: &Config, grid: Grid, section: &str) -> Result<Loaded, Failure> {
    let name = cfg.require(section, "preset")?.to_string();
    let (kind, summary) = match name.as_str() {
        "gaussian" => {
            let amplitude: f64 = cfg.require_parsed(section, "amplitude")?;
            let width: f64 = cfg.require_parsed(section, "width")?;
            (
                PresetKind::Gaussian { amplitude, width },
                format!("gaussian amplitude={amplitude} width={width}"),
            )
        }
        "bump" => {
            let amplitude: f64 = cfg.require_parsed(section, "amplitude")?;
            let radius: f64 = cfg.require_parsed(section, "radius")?;
            (
                PresetKind::Bump { amplitude, radius },
                format!("bump amplitude={amplitude} radius={radius}"),
            )
        }
        "dyadic" => {
            let amplitude: f64 = cfg.require_parsed(section, "amplitude")?;
            let rate: f64 = cfg.require_parsed(section, "rate")?;
            (
                PresetKind::Dyadic { amplitude, rate },
                format!("dyadic amplitude={amplitude} rate={rate}"),
            )
        }
        "zero" => (PresetKind::Zero, "zero".to_string()),
        other => {
            return Err(Failure::Invalid(format!(
                "[{section}] unknown preset `{other}`, expected gaussian, bump, dyadic, or zero"
            )))
        }
    };
    let sampled = presets::sample(kind, grid)?;
    Ok(Loaded {
        field: sampled.field,
        summary,
    })
}

/// Parses `x,y(,z)` into a unit vector of the grid dimension.
pub fn direction(raw: &str, dim: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let mut parts = Vec::new();
    for piece in raw.split(',') {
        parts.push(piece.trim().parse::<f64>().map_err(|_| {
            Failure::Invalid(format!("{what}: `{piece}` is not a number"))
        })?);
    }
    if parts.len() != dim {
        return Err(Failure::Invalid(format!(
            "{what}: got {} components, grid dimension is {dim}",
            parts.len()
        )));
    }
    let len: f64 = parts.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(len.is_finite() && len > 0.0) {
        return Err(Failure::Invalid(format!(
            "{what}: direction must be a nonzero finite vector"
        )));
    }
    Ok(parts.into_iter().map(|c| c / len).collect())
}
