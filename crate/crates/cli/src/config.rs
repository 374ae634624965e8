//! Flat `key = value` configuration files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{usage, CliResult};

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped, and values may be wrapped in double quotes.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("config line {}: expected `key = value`", i + 1)));
        };
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(usage(format!("config line {}: empty key", i + 1)));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(map)
}

/// Looks values up with precedence flag > config file > default and records
/// every resolved value for the report.
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> CliResult<Self> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Resolver {
            file,
            resolved: BTreeMap::new(),
        })
    }

    /// Raw string for `key`, without recording it.
    pub fn peek(&self, key: &str, flag: Option<&String>) -> Option<String> {
        flag.cloned().or_else(|| self.file.get(key).cloned())
    }

    pub fn raw(&mut self, key: &str, flag: Option<&String>) -> Option<String> {
        let v = self.peek(key, flag)?;
        self.resolved.insert(key.to_string(), v.clone());
        Some(v)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<&String>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
    {
        let Some(text) = self.peek(key, flag) else {
            return Ok(None);
        };
        let value: T = text
            .parse()
            .map_err(|_| usage(format!("invalid value `{text}` for --{key}")))?;
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(Some(value))
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<&String>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
    {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<&String>) -> CliResult<T>
    where
        T: FromStr + Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| usage(format!("missing required --{key}")))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}
