//! INI configs: `[section]` headers with flat `key = value` lines.
//!
//! Every lookup records the value actually used (defaults included) so the
//! report can embed the resolved config; keys never looked up are errors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

pub struct Config {
    values: BTreeMap<(String, String), String>,
    used: BTreeSet<(String, String)>,
    resolved: BTreeMap<String, BTreeMap<String, Value>>,
    base: PathBuf,
}

fn bad(section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("[{section}] {key}: {msg}"))
}

impl Config {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
            base: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let ini = ini::Ini::load_from_file(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("").trim().to_string();
            for (k, v) in props.iter() {
                let key = (section.clone(), k.trim().to_string());
                if values.insert(key, v.trim().to_string()).is_some() {
                    return Err(bad(&section, k, "given twice"));
                }
            }
        }
        Ok(Self {
            values,
            base: path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
            ..Self::empty()
        })
    }

    /// Directory that relative paths in the config resolve against.
    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn path(&self, p: &str) -> PathBuf {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            self.base.join(p)
        }
    }

    /// A required path, resolved against the config's directory.
    pub fn file(&mut self, section: &str, key: &str) -> Result<PathBuf, CliError> {
        let p = self.str(section, key)?;
        Ok(self.path(&p))
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.values.contains_key(&(section.to_string(), key.to_string()))
    }

    fn record(&mut self, section: &str, key: &str, v: Value) {
        self.resolved.entry(section.to_string()).or_default().insert(key.to_string(), v);
    }

    fn raw(&mut self, section: &str, key: &str) -> Option<String> {
        let k = (section.to_string(), key.to_string());
        let v = self.values.get(&k).cloned();
        self.used.insert(k);
        v
    }

    pub fn opt_str(&mut self, section: &str, key: &str) -> Option<String> {
        let v = self.raw(section, key);
        if let Some(s) = &v {
            self.record(section, key, Value::String(s.clone()));
        }
        v
    }

    pub fn str(&mut self, section: &str, key: &str) -> Result<String, CliError> {
        self.opt_str(section, key).ok_or_else(|| bad(section, key, "required"))
    }

    pub fn str_or(&mut self, section: &str, key: &str, default: &str) -> String {
        let v = self.raw(section, key).unwrap_or_else(|| default.to_string());
        self.record(section, key, Value::String(v.clone()));
        v
    }

    /// One of `choices`, case-insensitively.
    pub fn choice(&mut self, section: &str, key: &str, default: &str, choices: &[&str]) -> Result<String, CliError> {
        let v = self.str_or(section, key, default).to_ascii_lowercase();
        if choices.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(bad(section, key, format!("expected one of {}, got '{v}'", choices.join("|"))))
        }
    }

    fn parse_f64(section: &str, key: &str, s: &str) -> Result<f64, CliError> {
        s.parse::<f64>().map_err(|_| bad(section, key, format!("'{s}' is not a number")))
    }

    pub fn opt_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => {
                let v = Self::parse_f64(section, key, &s)?;
                self.record(section, key, Value::from(v));
                Ok(Some(v))
            }
        }
    }

    pub fn f64(&mut self, section: &str, key: &str) -> Result<f64, CliError> {
        self.opt_f64(section, key)?.ok_or_else(|| bad(section, key, "required"))
    }

    pub fn f64_or(&mut self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.opt_f64(section, key)?.unwrap_or(default);
        self.record(section, key, Value::from(v));
        Ok(v)
    }

    pub fn usize_or(&mut self, section: &str, key: &str, default: usize) -> Result<usize, CliError> {
        let v = match self.raw(section, key) {
            None => default,
            Some(s) => s.parse::<usize>().map_err(|_| bad(section, key, format!("'{s}' is not a non-negative integer")))?,
        };
        self.record(section, key, Value::from(v));
        Ok(v)
    }

    pub fn u64_or(&mut self, section: &str, key: &str, default: u64) -> Result<u64, CliError> {
        let v = match self.raw(section, key) {
            None => default,
            Some(s) => s.parse::<u64>().map_err(|_| bad(section, key, format!("'{s}' is not a non-negative integer")))?,
        };
        self.record(section, key, Value::from(v));
        Ok(v)
    }

    pub fn bool_or(&mut self, section: &str, key: &str, default: bool) -> Result<bool, CliError> {
        let v = match self.raw(section, key).as_deref().map(str::to_ascii_lowercase) {
            None => default,
            Some(s) => match s.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => return Err(bad(section, key, format!("'{s}' is not a boolean"))),
            },
        };
        self.record(section, key, Value::from(v));
        Ok(v)
    }

    /// Comma-separated numbers.
    pub fn list_or(&mut self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = match self.raw(section, key) {
            None => default.to_vec(),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| Self::parse_f64(section, key, p))
                .collect::<Result<Vec<_>, _>>()?,
        };
        self.record(section, key, Value::from(v.clone()));
        Ok(v)
    }

    pub fn list(&mut self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        if !self.has(section, key) {
            return Err(bad(section, key, "required"));
        }
        self.list_or(section, key, &[])
    }

    /// `lo,hi`.
    pub fn interval(&mut self, section: &str, key: &str) -> Result<(f64, f64), CliError> {
        match self.list(section, key)?.as_slice() {
            [lo, hi] => Ok((*lo, *hi)),
            _ => Err(bad(section, key, "expected 'lo,hi'")),
        }
    }

    /// Rejects keys the command never read.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<String> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(|(s, k)| format!("[{s}] {k}"))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    pub fn resolved(&self) -> Value {
        serde_json::to_value(&self.resolved).expect("string-keyed maps serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups_defaults_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ini");
        std::fs::write(&p, "[params]\nq = 64\nt_grid = 0.25, 0.5\nstray = 1\n").unwrap();
        let mut c = Config::load(&p).unwrap();
        assert_eq!(c.usize_or("params", "q", 512).unwrap(), 64);
        assert_eq!(c.list_or("params", "t_grid", &[]).unwrap(), vec![0.25, 0.5]);
        assert_eq!(c.f64_or("params", "tol", 1e-3).unwrap(), 1e-3);
        assert!(matches!(c.finish(), Err(CliError::Usage(m)) if m.contains("stray")));
        let r = c.resolved();
        assert_eq!(r["params"]["tol"], Value::from(1e-3));
        assert!(r["params"].get("stray").is_none());
    }

    #[test]
    fn type_errors_name_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ini");
        std::fs::write(&p, "[params]\nn = three\n").unwrap();
        let mut c = Config::load(&p).unwrap();
        assert!(matches!(c.f64("params", "n"), Err(CliError::Usage(m)) if m.contains("[params] n")));
    }
}
