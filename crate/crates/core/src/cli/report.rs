//! Report envelope and artifact writers.
//!
//! JSON objects use sorted keys (serde_json's default map) and Rust's
//! shortest round-trip float formatting, so equal inputs give equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::CliError;

pub const REPORT_SCHEMA: &str = "mesodrop.report/1";

/// A physical quantity with its unit.
pub fn q(value: f64, unit: &str) -> Value {
    json!({ "value": finite(value), "unit": unit })
}

/// A quantity paired with a published reference value.
pub fn cmp(value: f64, reference: f64, unit: &str, source: &str) -> Value {
    json!({
        "value": finite(value),
        "unit": unit,
        "reference": reference,
        "source": source,
        "rel_dev": finite(rel_dev(value, reference)),
    })
}

/// As [`cmp`] with a pass flag against `tol` (relative, or absolute in
/// the quantity's unit when `absolute` is set).
pub fn cmp_tol(value: f64, reference: f64, unit: &str, source: &str, tol: f64, absolute: bool) -> Value {
    let mut v = cmp(value, reference, unit, source);
    let ok = if absolute {
        (value - reference).abs() <= tol
    } else {
        rel_dev(value, reference).abs() <= tol
    };
    let m = v.as_object_mut().expect("object");
    m.insert("tolerance".into(), json!(tol));
    m.insert("tolerance_kind".into(), json!(if absolute { "absolute" } else { "relative" }));
    m.insert("within_tolerance".into(), json!(ok));
    v
}

pub fn rel_dev(value: f64, reference: f64) -> f64 {
    (value - reference) / reference.abs()
}

/// NaN and infinities become null.
pub fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn series(values: &[f64], unit: &str) -> Value {
    json!({ "values": values.iter().map(|v| finite(*v)).collect::<Vec<_>>(), "unit": unit })
}

pub struct Report {
    pub command: String,
    pub args: Map<String, Value>,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            args: Map::new(),
            results: Map::new(),
            warnings: Vec::new(),
        }
    }

    pub fn arg(&mut self, k: &str, v: impl Into<Value>) {
        self.args.insert(k.into(), v.into());
    }

    pub fn put(&mut self, k: &str, v: Value) {
        self.results.insert(k.into(), v);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{}: {msg}", self.command);
        self.warnings.push(msg);
    }

    pub fn into_value(self, config_hash: &str) -> Value {
        json!({
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "args": Value::Object(self.args),
            "config_hash": config_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "results": Value::Object(self.results),
            "warnings": self.warnings,
        })
    }
}

pub struct Writer {
    pub dir: PathBuf,
    pub config_hash: String,
    pub json: bool,
    pub csv: bool,
    pub written: Vec<String>,
}

impl Writer {
    pub fn new(dir: &Path, config_hash: String, json: bool, csv: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash,
            json,
            csv,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn report(&mut self, name: &str, report: Report) -> Result<(), CliError> {
        if !self.json {
            return Ok(());
        }
        let value = report.into_value(&self.config_hash);
        let mut text = serde_json::to_string_pretty(&value).expect("report serialises");
        text.push('\n');
        self.write(name, &text)
    }

    /// CSV with a `# config_hash` comment line, a header naming each column
    /// with its unit, and one row per sample.
    pub fn csv(&mut self, name: &str, header: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
        if !self.csv {
            return Ok(());
        }
        let rows = columns.first().map_or(0, |c| c.len());
        assert!(columns.iter().all(|c| c.len() == rows), "ragged CSV columns");
        let mut text = format!("# config_hash={}\n", self.config_hash);
        text.push_str(&header.join(","));
        text.push('\n');
        for i in 0..rows {
            for (j, c) in columns.iter().enumerate() {
                if j > 0 {
                    text.push(',');
                }
                let _ = write!(text, "{:e}", c[i]);
            }
            text.push('\n');
        }
        self.write(name, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_fields() {
        let v = cmp_tol(3.5, 3.52, "angstrom", "Table I", 0.05, false);
        assert_eq!(v["within_tolerance"], json!(true));
        assert_eq!(v["unit"], json!("angstrom"));
        let v = cmp_tol(-0.2, -0.03, "K", "Table I", 0.02, true);
        assert_eq!(v["within_tolerance"], json!(false));
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(q(f64::NAN, "J")["value"], Value::Null);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = Writer::new(dir.path(), "abc".into(), true, true).unwrap();
        w.csv("t.csv", &["r_angstrom", "v_joule"], &[&[1.0, 2.0], &[-1.5e-22, 0.0]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "# config_hash=abc\nr_angstrom,v_joule\n1e0,-1.5e-22\n2e0,0e0\n");
    }
}
