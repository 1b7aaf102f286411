//! Artifact emission: CSV tables, JSON records, field snapshots.
//!
//! Artifacts are buffered and written only after the computation has
//! finished, so a failing run leaves no partial outputs.  Floats are
//! printed with a fixed scientific precision, making reruns of the same
//! effective config byte-identical.

use crate::config::Config;
use crate::Failure;
use serde::Serialize;
use statwave::field_io;
use statwave::Field;
use std::path::{Path, PathBuf};

/// Twelve significant decimals: stable across platforms, fine enough that
/// re-parsing loses nothing detectable at solver tolerances.
pub fn float(x: f64) -> String {
    format!("{x:.12e}")
}

/// A CSV table with the digest comment and unit-annotated header row.
pub struct Csv {
    lines: Vec<String>,
    columns: usize,
}

impl Csv {
    /// `header` cells name each column with its unit, `name[unit]`.
    pub fn new(command: &str, digest: &str, header: &[&str]) -> Csv {
        Csv {
            lines: vec![
                format!("# statwave {command} v1 config={digest}"),
                header.join(","),
            ],
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width fixed by the header");
        self.lines.push(cells.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let body = self.lines.join("\n") + "\n";
        std::fs::write(path, body)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))
    }
}

/// Pretty-prints a report to stdout; key order follows the struct, so the
/// output is stable.
pub fn print_json<T: Serialize>(record: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| Failure::Invalid(format!("cannot serialize report: {e}")))?;
    println!("{text}");
    Ok(())
}

/// Resolves `[output] dir` (default `.`), creating it on first use.
pub fn out_dir(cfg: &Config) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(cfg.get("output", "dir").unwrap_or("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Invalid(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn save_field(field: &Field, path: &Path) -> Result<(), Failure> {
    field_io::save_field(field, path)?;
    Ok(())
}
