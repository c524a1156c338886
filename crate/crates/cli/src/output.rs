//! CSV, JSON and gnuplot-script writers.
//!
//! CSV files start with `#` comment lines carrying the format version and the
//! resolved configuration, followed by a header row and comma-separated
//! records. Every line ends in CRLF. Numbers are written in scientific
//! notation with 15 significant digits; missing values are empty fields.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Settings;
use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub fn generator() -> String {
    format!("esdsim {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// `1.23456789012346e-05` style: 15 significant digits, signed two-digit
/// (or wider) exponent.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "Infinity".into() } else { "-Infinity".into() };
    }
    let s = format!("{v:.14e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, contents).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

/// Writes a CSV with the metadata preamble. `extra` adds scenario-specific
/// metadata lines after the configuration.
pub fn write_csv(
    path: &Path,
    settings: &Settings,
    extra: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<Cell>>,
) -> Result<PathBuf, CliError> {
    let mut out = String::new();
    out.push_str(&format!("# generator = {}\r\n", generator()));
    out.push_str(&format!("# format_version = {FORMAT_VERSION}\r\n"));
    for (k, v) in settings.entries() {
        out.push_str(&format!("# config.{k} = {v}\r\n"));
    }
    for (k, v) in extra {
        out.push_str(&format!("# {k} = {v}\r\n"));
    }
    out.push_str(&header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","));
    out.push_str("\r\n");
    for row in rows {
        let line: Vec<String> = row
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => format_number(v),
                Cell::Text(s) => quote(&s),
                Cell::Null => String::new(),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push_str("\r\n");
    }
    write_file(path, &out)
}

/// Metadata object shared by all JSON outputs.
pub fn metadata(settings: &Settings) -> Value {
    let config: Map<String, Value> = settings
        .entries()
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let mut m = Map::new();
    m.insert("generator".into(), Value::String(generator()));
    m.insert("format_version".into(), Value::from(FORMAT_VERSION));
    m.insert("config".into(), Value::Object(config));
    Value::Object(m)
}

/// Writes `{"metadata": ..., <payload fields>}` as pretty JSON.
pub fn write_json(path: &Path, settings: &Settings, payload: Map<String, Value>) -> Result<PathBuf, CliError> {
    let mut doc = Map::new();
    doc.insert("metadata".into(), metadata(settings));
    doc.extend(payload);
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    write_file(path, &text)
}

/// Writes a gnuplot script; `data` is referenced relative to the script.
pub fn write_plot(path: &Path, title: &str, body: &str) -> Result<PathBuf, CliError> {
    let script = format!(
        "# {}\n# usage: gnuplot -persist {}\nset datafile separator ','\nset datafile commentschars '#'\nset title '{title}'\nset key outside right\nset grid\n{body}",
        generator(),
        path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
    );
    write_file(path, &script)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1.00000000000000e+00");
        assert_eq!(format_number(-0.000123), "-1.23000000000000e-04");
        assert_eq!(format_number(6.02e123), "6.02000000000000e+123");
        assert_eq!(format_number(0.0), "0.00000000000000e+00");
        let v = 0.123_456_789_012_345_68;
        assert_eq!(format_number(v).parse::<f64>().unwrap(), 0.123456789012346);
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("plain"), "plain");
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
