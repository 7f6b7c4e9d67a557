//! Report JSON and CSV tables.

use crate::error::HarnessError;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Refused,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Refused => 1,
            Status::Failed => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    /// SHA-256 of the canonical input document.
    pub scenario_digest: String,
    pub status: Status,
    pub tolerance: f64,
    pub metrics: serde_json::Value,
    pub diagnostics: Vec<String>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
    pub wall_clock_s: f64,
}

impl Report {
    pub fn new(command: &str, scenario_digest: String, tolerance: f64) -> Self {
        Report {
            command: command.to_string(),
            scenario_digest,
            status: Status::Pass,
            tolerance,
            metrics: serde_json::Value::Null,
            diagnostics: Vec::new(),
            files: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn fail(&mut self, message: String) {
        self.status = Status::Failed;
        self.diagnostics.push(message);
    }
}

/// A CSV table built in memory; fields are written with `f64`'s shortest
/// round-trip formatting so identical inputs give identical bytes.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[Field]) {
        assert_eq!(fields.len(), self.columns, "row width");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f {
                Field::Num(x) => write!(self.text, "{x:e}").unwrap(),
                Field::Text(s) => self.text.push_str(s),
                Field::Empty => {}
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        write_file(dir, &self.name, self.text.as_bytes())
    }
}

pub enum Field {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
    let io = |e| HarnessError::Write {
        path: dir.join(name).display().to_string(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(io)?;
    Ok(path)
}

pub fn write_report(dir: &Path, report: &Report) -> Result<PathBuf, HarnessError> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
    bytes.push(b'\n');
    write_file(dir, "report.json", &bytes)
}
