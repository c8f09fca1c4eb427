//! Flat-key TOML run files. A key names a long flag (`n-max` or `n_max`);
//! a flag given on the command line wins over the file.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use dyadic_bumps::step::Interval;
use dyadic_bumps::YoungFunction;

use crate::io::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
    used: RefCell<BTreeSet<String>>,
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let raw: toml::Table = text
            .parse()
            .map_err(|e| CliError::input(format!("config {} is not valid TOML: {e}", path.display())))?;
        let mut table = toml::Table::new();
        for (k, v) in raw {
            if v.is_table() && !matches!(k.as_str(), "young" | "young-b" | "young_b" | "phi") {
                return Err(CliError::input(format!("config key {k}: nested sections are not supported")));
            }
            table.insert(normalize(&k), v);
        }
        Ok(Self {
            table,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    fn value(&self, key: &str) -> Option<&toml::Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    fn bad(key: &str, want: &str, v: &toml::Value) -> CliError {
        CliError::input(format!("config key {key}: expected {want}, got {v}"))
    }

    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let file = self.value(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match file {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Self::bad(key, "a number", v)),
        }
    }

    pub fn int<T: TryFrom<i64>>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let file = self.value(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match file {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => T::try_from(*i).map(Some).map_err(|_| Self::bad(key, "an integer in range", &toml::Value::Integer(*i))),
            Some(v) => Err(Self::bad(key, "an integer", v)),
        }
    }

    pub fn string(&self, key: &str, flag: Option<String>) -> Result<Option<String>, CliError> {
        let file = self.value(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match file {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Self::bad(key, "a string", v)),
        }
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
        Ok(self.string(key, flag.map(|p| p.to_string_lossy().into_owned()))?.map(PathBuf::from))
    }

    pub fn required_path(&self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        self.path(key, flag)?
            .ok_or_else(|| CliError::input(format!("--{key} is required (flag or config key)")))
    }

    /// A Young function given as JSON text, or as an inline table in the file.
    pub fn young(&self, key: &str, flag: Option<String>) -> Result<Option<YoungFunction>, CliError> {
        let file = self.value(key);
        let text = match (flag, file) {
            (Some(s), _) => s,
            (None, None) => return Ok(None),
            (None, Some(toml::Value::String(s))) => s.clone(),
            (None, Some(v @ toml::Value::Table(_))) => serde_json::to_string(v).expect("TOML values are JSON-representable"),
            (None, Some(v)) => return Err(Self::bad(key, "a Young function", v)),
        };
        YoungFunction::from_json(&text)
            .map(Some)
            .map_err(|e| CliError::input(format!("--{key}: {e}")))
    }

    pub fn interval(&self, key: &str, flag: Option<Interval>) -> Result<Option<Interval>, CliError> {
        let file = self.value(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match file {
            None => Ok(None),
            Some(toml::Value::String(s)) => parse_interval(s).map(Some).map_err(CliError::input),
            Some(toml::Value::Array(a)) if a.len() == 2 => {
                let num = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
                match (num(&a[0]), num(&a[1])) {
                    (Some(lo), Some(hi)) => Interval::new(lo, hi).map(Some).map_err(|e| CliError::input(e.to_string())),
                    _ => Err(Self::bad(key, "two numbers", &toml::Value::Array(a.clone()))),
                }
            }
            Some(v) => Err(Self::bad(key, "an interval lo:hi", v)),
        }
    }

    /// Rejects keys that the command never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.table.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::input(format!(
                "config keys not used by this command: {}",
                unknown.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    }
}

/// `lo:hi`.
pub fn parse_interval(s: &str) -> Result<Interval, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number {hi:?}"))?;
    Interval::new(lo, hi).map_err(|e| e.to_string())
}
