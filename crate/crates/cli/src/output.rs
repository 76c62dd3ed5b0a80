//! Data-file rendering. Numbers are printed with 17 significant digits so a
//! parsed value round-trips to the same f64.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::OutputFormat;
use crate::error::{CliError, Result};

/// Formats `v` with 17 significant digits, e.g. `1.2500000000000000e-3`.
pub fn fmt_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Columns of numbers plus `key=value` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::DelimitedText => self.render_delimited(),
            OutputFormat::StructuredText => self.render_structured(),
        }
    }

    fn render_delimited(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_structured(&self) -> String {
        let mut out = String::from("[meta]\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "{k} = {}", toml_string(v));
        }
        out.push_str("\n[data]\ncolumns = [");
        let cols: Vec<String> = self.columns.iter().map(|c| toml_string(c)).collect();
        out.push_str(&cols.join(", "));
        out.push_str("]\nrows = [\n");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_number(v)).collect();
            let _ = writeln!(out, "  [{}],", cells.join(", "));
        }
        out.push_str("]\n");
        out
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
