//! Flat `key = value` configuration with optional `[section]` blocks.
//!
//! Keys before the first section apply to every subcommand; a section named
//! after the subcommand overrides them. `--set` overrides both, and the
//! dedicated flags (`--mode`, `--horizon`, `--grid`) override everything.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use esd_core::dynamics::{CoefficientMode, Mode};

use crate::CliError;

/// Every accepted key, with its default (empty means "no default").
pub const KEYS: &[(&str, &str)] = &[
    ("omega0", "1"),
    ("r", "0.1"),
    ("kt", "3"),
    ("coupling2", "1"),
    ("a", "0"),
    ("alpha", "0"),
    ("mode", "nonmarkov"),
    ("horizon", "50"),
    ("grid", "0.05"),
    ("dwell", "1"),
    ("update_step", "0.1"),
    ("neglect_gamma", "false"),
    ("coefficients", "direct"),
    ("table_step", ""),
    ("atol", "1e-10"),
    ("rtol", "1e-8"),
    ("scenario", "concurrence_vs_a"),
    ("seed", "20240229"),
    ("kernel_points", "50"),
    ("x_states", "1000"),
];

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Parses `key = value` lines grouped by section (`""` for the global block).
pub fn parse_file(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>, CliError> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key = value, got '{raw}'",
                n + 1
            )));
        };
        let key = k.trim().to_ascii_lowercase();
        if !known(&key) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", n + 1)));
        }
        sections
            .entry(current.clone())
            .or_default()
            .insert(key, v.trim().to_string());
    }
    Ok(sections)
}

/// Fully resolved settings for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(
        subcommand: &str,
        file: Option<&Path>,
        sets: &[String],
        flags: &[(&str, Option<String>)],
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = KEYS
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let sections = parse_file(&text)?;
            for name in ["", subcommand] {
                if let Some(block) = sections.get(name) {
                    values.extend(block.clone());
                }
            }
        }
        for item in sets {
            let Some((k, v)) = item.split_once('=') else {
                return Err(CliError::Usage(format!("--set expects KEY=VALUE, got '{item}'")));
            };
            let key = k.trim().to_ascii_lowercase();
            if !known(&key) {
                return Err(CliError::Usage(format!("--set: unknown key '{key}'")));
            }
            values.insert(key, v.trim().to_string());
        }
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    /// `(key, value)` pairs in key order, for metadata echoes.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Usage(format!("missing value for '{key}'")))?;
        parse_number(key, raw)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|raw| parse_number(key, raw)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.raw(key).unwrap_or("");
        raw.parse()
            .map_err(|_| CliError::Usage(format!("'{key}' must be a non-negative integer, got '{raw}'")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let raw = self.raw(key).unwrap_or("");
        raw.parse()
            .map_err(|_| CliError::Usage(format!("'{key}' must be a non-negative integer, got '{raw}'")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key).unwrap_or("") {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Usage(format!("'{key}' must be true or false, got '{other}'"))),
        }
    }

    /// A list value: comma-separated numbers and/or `start:stop:count`
    /// ranges (inclusive, evenly spaced).
    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_list(key, self.raw(key).unwrap_or(""))
    }

    /// A key that must hold exactly one value.
    pub fn scalar(&self, key: &str) -> Result<f64, CliError> {
        let v = self.list(key)?;
        if v.len() != 1 {
            return Err(CliError::Usage(format!(
                "'{key}' must be a single value for this subcommand"
            )));
        }
        Ok(v[0])
    }

    pub fn modes(&self) -> Result<Vec<Mode>, CliError> {
        match self.raw("mode").unwrap_or("") {
            "nonmarkov" => Ok(vec![Mode::NonMarkovian]),
            "markov" => Ok(vec![Mode::Markovian]),
            "both" => Ok(vec![Mode::NonMarkovian, Mode::Markovian]),
            other => Err(CliError::Usage(format!(
                "mode must be markov, nonmarkov or both, got '{other}'"
            ))),
        }
    }

    pub fn coefficient_mode(&self) -> Result<CoefficientMode, CliError> {
        match self.raw("coefficients").unwrap_or("") {
            "direct" => Ok(CoefficientMode::Direct),
            "table" => Ok(CoefficientMode::Table {
                step: self.opt_f64("table_step")?,
            }),
            other => Err(CliError::Usage(format!(
                "coefficients must be direct or table, got '{other}'"
            ))),
        }
    }
}

fn parse_number(key: &str, raw: &str) -> Result<f64, CliError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("'{key}' must be a finite number, got '{raw}'")))
}

pub fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(parse_number(key, single)?),
            [start, stop, count] => {
                let (a, b) = (parse_number(key, start)?, parse_number(key, stop)?);
                let n: usize = count.trim().parse().map_err(|_| {
                    CliError::Usage(format!("'{key}': range count must be an integer in '{item}'"))
                })?;
                match n {
                    0 => {}
                    1 => out.push(a),
                    _ => out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64)),
                }
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "'{key}': expected a number or start:stop:count, got '{item}'"
                )))
            }
        }
    }
    Ok(out)
}
