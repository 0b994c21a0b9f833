//! Line-oriented `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored, except lines starting
//! with `#%`: those carry the configuration echoed into a CSV header, so a
//! CSV written by this tool is itself a valid configuration file that
//! reproduces it. When a file has any `#%` line only those lines are read.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;
pub const ECHO_PREFIX: &str = "#%";

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    base_dir: Option<PathBuf>,
    used: BTreeSet<String>,
    echo: Vec<(String, String)>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let echoed = text.lines().any(|l| l.trim_start().starts_with(ECHO_PREFIX));
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let body = if let Some(rest) = line.strip_prefix(ECHO_PREFIX) {
                rest.trim()
            } else if echoed || line.is_empty() || line.starts_with('#') {
                continue;
            } else {
                line
            };
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value, got `{raw}`", i + 1)))?;
            cfg.insert(k.trim(), v.trim(), Some(i + 1))?;
        }
        Ok(cfg)
    }

    /// Reads a file; relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), CliError> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            let at = line.map(|l| format!("config line {l}: ")).unwrap_or_default();
            return Err(usage(format!("{at}invalid key `{key}`")));
        }
        if line.is_some() && self.entries.contains_key(key) {
            return Err(usage(format!("config line {}: duplicate key `{key}`", line.unwrap_or(0))));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override; later overrides win.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| usage(format!("override `{assignment}` is not key=value")))?;
        self.insert(k.trim(), v.trim(), None)
    }

    pub fn set_value(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Looks up `key` without recording it in the echo.
    pub fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    /// Parses `key`, falling back to `default`, and records the canonical
    /// form of the value in the echo.
    pub fn get_with<T>(
        &mut self,
        key: &str,
        default: Option<T>,
        parse: impl Fn(&str) -> Result<T, String>,
        show: impl Fn(&T) -> String,
    ) -> Result<T, CliError> {
        self.used.insert(key.to_string());
        let value = match self.entries.get(key) {
            Some(text) => parse(text).map_err(|e| usage(format!("`{key}`: {e}")))?,
            None => default.ok_or_else(|| usage(format!("missing required key `{key}`")))?,
        };
        self.echo.push((key.to_string(), show(&value)));
        Ok(value)
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get_with(key, default, |s| s.parse::<T>().map_err(|e| e.to_string()), |v| v.to_string())
    }

    /// A comma-separated list, or `start:stop:step` for an inclusive grid.
    pub fn grid(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        self.get_with(key, Some(default), parse_grid, |v| join(v))
    }

    pub fn list(&mut self, key: &str, default: &[&str]) -> Result<Vec<String>, CliError> {
        let default = default.iter().map(|s| s.to_string()).collect();
        self.get_with(
            key,
            Some(default),
            |s| {
                let items: Vec<String> = s.split(',').map(|t| t.trim().to_string()).collect();
                if items.iter().any(String::is_empty) {
                    return Err("empty list item".into());
                }
                Ok(items)
            },
            |v| v.join(","),
        )
    }

    /// `key` as a path, resolved against the config file's directory.
    pub fn path(&mut self, key: &str) -> Result<Option<PathBuf>, CliError> {
        let text = self.get_with(key, Some(String::new()), |s| Ok(s.to_string()), |s| s.clone())?;
        if text.is_empty() || text == "none" {
            return Ok(None);
        }
        let p = PathBuf::from(text);
        Ok(Some(match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        }))
    }

    /// Rejects keys no command read.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> =
            self.entries.keys().filter(|k| !self.used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(usage(format!("unknown key(s) for this command: {}", unknown.join(", "))))
        }
    }

    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", t.trim()));
    let v = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("range must be start:stop:step".into());
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(b >= a) {
            return Err("range needs step > 0 and stop >= start".into());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        // rounding keeps e.g. -12 + 5 * 2.4 from printing as -0.0000000001
        (0..count).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9 + 0.0).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err("grid must hold finite values".into());
    }
    Ok(v)
}
