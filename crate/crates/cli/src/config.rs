//! Sectioned key-value configuration with line diagnostics.
//!
//! The format is deliberately small: `[section]` headers, `key = value`
//! lines, blank lines, and `#` or `;` comments.  Every entry remembers its
//! line so errors and the unused-key sweep can point back into the file.
//! Keys read through the typed getters are marked consumed; a command
//! calls [`Config::reject_unused`] after parameter extraction so a typo
//! fails the run instead of being silently ignored.

use crate::Failure;
use std::cell::Cell;
use std::collections::BTreeMap;

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    consumed: Cell<bool>,
}

#[derive(Debug)]
pub struct Config {
    path: String,
    entries: BTreeMap<(String, String), Entry>,
}

impl Config {
    pub fn load(path: &str) -> Result<Config, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read config `{path}`: {e}")))?;
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Failure::Invalid(format!("{path}:{line}: unterminated section header"))
                })?;
                section = name.trim().to_string();
                if section.is_empty() {
                    return Err(Failure::Invalid(format!(
                        "{path}:{line}: empty section name"
                    )));
                }
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                Failure::Invalid(format!("{path}:{line}: expected `key = value`"))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Failure::Invalid(format!("{path}:{line}: empty key")));
            }
            if section.is_empty() {
                return Err(Failure::Invalid(format!(
                    "{path}:{line}: key `{key}` before any [section]"
                )));
            }
            let entry = Entry {
                value: value.trim().to_string(),
                line,
                consumed: Cell::new(false),
            };
            if let Some(old) = entries.insert((section.clone(), key.clone()), entry) {
                return Err(Failure::Invalid(format!(
                    "{path}:{line}: key `{key}` repeats in [{section}] (first at line {})",
                    old.line
                )));
            }
        }
        Ok(Config {
            path: path.to_string(),
            entries,
        })
    }

    /// Drops a key if present, so an override can retire file keys its
    /// replacement makes meaningless.
    pub fn unset(&mut self, section: &str, key: &str) {
        self.entries.remove(&(section.to_string(), key.to_string()));
    }

    /// Inserts or replaces a key, as a `--flag value` override does.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.entries.insert(
            (section.to_string(), key.to_string()),
            Entry {
                value: value.to_string(),
                line: 0,
                consumed: Cell::new(false),
            },
        );
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .inspect(|entry| entry.consumed.set(true))
    }

    fn place(&self, entry: &Entry) -> String {
        if entry.line == 0 {
            "command line".to_string()
        } else {
            format!("{}:{}", self.path, entry.line)
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str, Failure> {
        self.get(section, key).ok_or_else(|| {
            Failure::Invalid(format!(
                "{}: missing key `{key}` in [{section}]",
                self.path
            ))
        })
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T, Failure> {
        let entry = self.entry(section, key).expect("caller checked presence");
        entry.value.parse().map_err(|_| {
            Failure::Invalid(format!(
                "{}: [{section}] {key}: cannot parse `{}` as {}",
                self.place(entry),
                entry.value,
                std::any::type_name::<T>()
            ))
        })
    }

    pub fn get_parsed<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, Failure> {
        match self.get(section, key) {
            None => Ok(None),
            Some(_) => self.parse(section, key).map(Some),
        }
    }

    pub fn require_parsed<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<T, Failure> {
        self.require(section, key)?;
        self.parse(section, key)
    }

    pub fn parsed_or<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        default: T,
    ) -> Result<T, Failure> {
        Ok(self.get_parsed(section, key)?.unwrap_or(default))
    }

    /// Comma-separated float list.
    pub fn require_f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, Failure> {
        let raw = self.require(section, key)?.to_string();
        let mut out = Vec::new();
        for piece in raw.split(',') {
            let piece = piece.trim();
            out.push(piece.parse().map_err(|_| {
                Failure::Invalid(format!(
                    "{}: [{section}] {key}: `{piece}` is not a number",
                    self.path
                ))
            })?);
        }
        Ok(out)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }

    /// Fails if any key was never read, pointing at each offending line.
    pub fn reject_unused(&self) -> Result<(), Failure> {
        let mut leftover: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, entry)| !entry.consumed.get())
            .map(|((section, key), entry)| {
                format!("{}: [{section}] {key}", self.place(entry))
            })
            .collect();
        if leftover.is_empty() {
            return Ok(());
        }
        leftover.sort();
        Err(Failure::Invalid(format!(
            "unrecognized configuration keys:\n  {}",
            leftover.join("\n  ")
        )))
    }

    /// FNV-1a digest of the effective configuration, overrides included.
    ///
    /// Entries are hashed in sorted order, so the digest identifies the
    /// experiment regardless of key order in the file.
    pub fn digest(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                hash ^= u64::from(*b);
                hash = hash.wrapping_mul(0x1_0000_01b3);
            }
        };
        for ((section, key), entry) in &self.entries {
            eat(section.as_bytes());
            eat(b".");
            eat(key.as_bytes());
            eat(b"=");
            eat(entry.value.as_bytes());
            eat(b"\n");
        }
        format!("{hash:016x}")
    }
}
