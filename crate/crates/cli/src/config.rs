//! `key = value` configuration text: one assignment per line, `#` starts a
//! comment, blank lines are ignored. `sweep` may repeat; every other key
//! may appear once.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::sweep::{SweepAxis, SweepError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}`; valid keys: {valid}")]
    UnknownKey { key: String, valid: String },
    #[error("key `{key}`: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("line {line}: {source}")]
    Sweep { line: usize, source: SweepError },
}

/// Splits one `key = value` assignment, trimming both sides.
pub fn parse_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parsed configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub values: BTreeMap<String, String>,
    pub sweeps: Vec<SweepAxis>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    let mut out = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = parse_assignment(body).ok_or_else(|| ConfigError::Syntax {
            line,
            text: body.to_string(),
        })?;
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line });
        }
        if key == "sweep" {
            let axis = value
                .parse()
                .map_err(|source| ConfigError::Sweep { line, source })?;
            out.sweeps.push(axis);
            continue;
        }
        if out.values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
    }
    Ok(out)
}

/// Value type of a key; numeric keys can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    /// Swept values are rounded to the nearest integer.
    Int,
    Text,
}

/// A command's accepted keys with their defaults.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub kind: Kind,
}

pub const fn key(name: &'static str, default: &'static str, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        default,
        kind,
    }
}

/// Effective settings: defaults overlaid with file values and overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(
        spec: &[KeySpec],
        layers: &[&BTreeMap<String, String>],
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> = spec
            .iter()
            .map(|k| (k.name.to_string(), k.default.to_string()))
            .collect();
        for layer in layers {
            for (k, v) in layer.iter() {
                if !values.contains_key(k) {
                    return Err(ConfigError::UnknownKey {
                        key: k.clone(),
                        valid: names(spec, |_| true),
                    });
                }
                values.insert(k.clone(), v.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key `{key}` missing from its command spec"))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, expected: &'static str) -> Result<T, ConfigError> {
        let v = self.raw(key);
        v.parse().map_err(|_| ConfigError::BadValue {
            key: key.to_string(),
            value: v.to_string(),
            expected,
        })
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.parsed(key, "a number")
    }

    pub fn u32(&self, key: &str) -> Result<u32, ConfigError> {
        self.parsed(key, "a non-negative integer")
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.parsed(key, "a non-negative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        self.parsed(key, "true or false")
    }

    pub fn string(&self, key: &str) -> &str {
        self.raw(key)
    }

    /// Comma-separated list.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let v = self.raw(key);
        v.split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                expected: "a comma-separated list",
            })
    }
}

pub fn names(spec: &[KeySpec], keep: impl Fn(&KeySpec) -> bool) -> String {
    spec.iter()
        .filter(|k| keep(k))
        .map(|k| k.name)
        .collect::<Vec<_>>()
        .join(", ")
}
