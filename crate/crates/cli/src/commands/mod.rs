//! One module per subcommand, plus the flag tables and shared parameter
//! readers they draw on.

pub mod herglotz;
pub mod norms;
pub mod propagate;
pub mod recover;
pub mod resolvent_probe;
pub mod stationary_state;
pub mod verify;

use crate::config::Config;
use crate::Failure;
use serde::Serialize;
use statwave::resolvent::PvSettings;
use statwave::Grid;

/// A `--flag value` override and the config keys it edits.
pub struct Override {
    pub flag: &'static str,
    target: Target,
}

enum Target {
    /// Plain `[section] key = value`.
    Key(&'static str, &'static str),
    /// `--grid n,N,L`, three keys at once.
    GridTriple,
    /// `--potential` / `--initial`: a preset name or a snapshot path.
    FieldSpec(&'static str),
}

impl Override {
    const fn key(flag: &'static str, section: &'static str, key: &'static str) -> Override {
        Override {
            flag,
            target: Target::Key(section, key),
        }
    }

    pub fn apply(&self, cfg: &mut Config, value: &str) -> Result<(), Failure> {
        match self.target {
            Target::Key(section, key) => {
                cfg.set(section, key, value.trim());
                Ok(())
            }
            Target::GridTriple => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Failure::Invalid(format!(
                        "--grid wants `n,N,L`, got `{value}`"
                    )));
                }
                cfg.set("grid", "n", parts[0]);
                cfg.set("grid", "N", parts[1]);
                cfg.set("grid", "L", parts[2]);
                Ok(())
            }
            Target::FieldSpec(section) => {
                if matches!(value, "gaussian" | "bump" | "dyadic" | "zero") {
                    cfg.set(section, "preset", value);
                    cfg.unset(section, "path");
                } else {
                    cfg.set(section, "path", value.trim());
                    for key in ["preset", "amplitude", "width", "radius", "rate"] {
                        cfg.unset(section, key);
                    }
                }
                Ok(())
            }
        }
    }
}

/// The flags a command accepts; `None` marks an unknown command.
pub fn override_table(command: &str) -> Option<&'static [Override]> {
    const NONE: &[Override] = &[];
    const HERGLOTZ: &[Override] = &[
        Override::key("lambda", "herglotz", "lambda"),
        Override::key("eps", "herglotz", "eps"),
        Override::key("direction", "herglotz", "direction"),
        Override {
            flag: "grid",
            target: Target::GridTriple,
        },
    ];
    const PROPAGATE: &[Override] = &[
        Override::key("T", "propagate", "T"),
        Override::key("dt", "propagate", "dt"),
        Override {
            flag: "potential",
            target: Target::FieldSpec("potential"),
        },
        Override {
            flag: "initial",
            target: Target::FieldSpec("initial"),
        },
    ];
    match command {
        "norms" | "resolvent-probe" | "stationary-state" | "recover" | "verify-estimates" => {
            Some(NONE)
        }
        "herglotz" => Some(HERGLOTZ),
        "propagate" => Some(PROPAGATE),
        _ => None,
    }
}

/// Grid echo found in every JSON report.
#[derive(Serialize)]
pub struct GridEcho {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl GridEcho {
    pub fn of(grid: Grid) -> GridEcho {
        GridEcho {
            n: grid.dim(),
            points: grid.size(),
            half_width: grid.half_width(),
        }
    }
}

/// Regularization-width keys shared by the solver-backed commands.
///
/// `eta = grid-tied` (the default) scales the width with the frequency
/// cell, `eta = <number>` fixes it, and `eta_ladder = a,b,...` requests
/// extrapolation through a decreasing list of widths.
pub fn pv_settings(cfg: &Config, section: &str) -> Result<PvSettings, Failure> {
    if cfg.get(section, "eta_ladder").is_some() {
        if cfg.get(section, "eta").is_some() || cfg.get(section, "eta_scale").is_some() {
            return Err(Failure::Invalid(format!(
                "[{section}] eta_ladder replaces eta and eta_scale; remove them"
            )));
        }
        let ladder = cfg.require_f64_list(section, "eta_ladder")?;
        let base = ladder[0];
        return Ok(PvSettings::fixed(base).with_extrapolation(ladder));
    }
    match cfg.get(section, "eta") {
        None | Some("grid-tied") => {
            let scale = cfg.parsed_or(section, "eta_scale", 4.0)?;
            Ok(PvSettings::grid_tied(scale))
        }
        Some(raw) => {
            let eta: f64 = raw.parse().map_err(|_| {
                Failure::Invalid(format!(
                    "[{section}] eta: expected `grid-tied` or a number, got `{raw}`"
                ))
            })?;
            Ok(PvSettings::fixed(eta))
        }
    }
}
