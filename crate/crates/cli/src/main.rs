//! Command-line front door: loads a sectioned key-value config, runs one
//! experiment, and writes its artifacts.
//!
//! Every run is `statwave <command> <config> [--flag value ...]`.  The
//! config carries the experiment; flags override single keys so a sweep
//! script can reuse one file.  Outputs are deterministic for a fixed
//! effective config: worker fan-out never reorders rows, and every CSV
//! names the config digest it was produced from.
//!
//! Exit codes: 0 success, 1 unknown command, 2 invalid configuration or
//! arguments, 3 numerical failure (divergence, or a failed check in
//! `verify-estimates`).

mod commands;
mod config;
mod fields;
mod report;

use std::fmt;
use std::process::ExitCode;

const USAGE: &str = "statwave <command> <config.cfg> [--flag value ...]

commands:
  norms              print the weighted norms of a potential as JSON
  herglotz           synthesize a superposition of plane waves
                     (flags: --lambda --eps --direction --grid n,N,L)
  resolvent-probe    tabulate regularized-resolvent decay as CSV
  stationary-state   solve for a stationary scattering state
  recover            estimate potential-difference modes on a lattice
  propagate          evolve an initial state under a potential
                     (flags: --T --dt --potential --initial)
  verify-estimates   run the full acceptance battery

STATWAVE_WORKERS caps the worker pool for fan-out loops.";

/// A failed run, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Command name not in the table.
    UnknownCommand(String),
    /// Bad arguments, malformed config, or invalid parameter values.
    Invalid(String),
    /// A solver diverged or a verification check failed.
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::UnknownCommand(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::UnknownCommand(name) => write!(f, "unknown command `{name}`"),
            Failure::Invalid(what) | Failure::Numerical(what) => f.write_str(what),
        }
    }
}

/// Divergence keeps exit code 3; everything else the library rejects is a
/// configuration problem.
impl From<statwave::Error> for Failure {
    fn from(e: statwave::Error) -> Failure {
        match e {
            statwave::Error::DivergentSeries { .. } | statwave::Error::MaxIterations { .. } => {
                Failure::Numerical(e.to_string())
            }
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(args: &[String]) -> Result<(), Failure> {
    let command = match args.first().map(String::as_str) {
        None | Some("--help") | Some("-h") => {
            println!("{USAGE}");
            return Ok(());
        }
        Some(name) => name,
    };
    let overrides = commands::override_table(command)
        .ok_or_else(|| Failure::UnknownCommand(command.to_string()))?;

    let config_path = args
        .get(1)
        .filter(|a| !a.starts_with("--"))
        .ok_or_else(|| Failure::Invalid(format!("usage: statwave {command} <config.cfg>")))?;
    let mut cfg = config::Config::load(config_path)?;
    apply_overrides(&mut cfg, &args[2..], overrides)?;

    match command {
        "norms" => commands::norms::run(&cfg),
        "herglotz" => commands::herglotz::run(&cfg),
        "resolvent-probe" => commands::resolvent_probe::run(&cfg),
        "stationary-state" => commands::stationary_state::run(&cfg),
        "recover" => commands::recover::run(&cfg),
        "propagate" => commands::propagate::run(&cfg),
        "verify-estimates" => commands::verify::run(&cfg),
        _ => unreachable!("override_table vetted the name"),
    }
}

/// Applies `--flag value` pairs through the command's override table, so a
/// flag edits the same key the config file would set.
fn apply_overrides(
    cfg: &mut config::Config,
    rest: &[String],
    table: &[commands::Override],
) -> Result<(), Failure> {
    let mut iter = rest.iter();
    while let Some(arg) = iter.next() {
        let name = arg
            .strip_prefix("--")
            .ok_or_else(|| Failure::Invalid(format!("expected a --flag, got `{arg}`")))?;
        let spot = table
            .iter()
            .find(|o| o.flag == name)
            .ok_or_else(|| Failure::Invalid(format!("unknown flag --{name}")))?;
        let value = iter
            .next()
            .ok_or_else(|| Failure::Invalid(format!("flag --{name} wants a value")))?;
        spot.apply(cfg, value)?;
    }
    Ok(())
}
