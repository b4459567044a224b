//! Tabular output in CSV or JSON, plus the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::{CliError, Format};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(v) if v.is_nan() => "NaN".to_string(),
            Cell::Real(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(_) | Cell::Missing => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Real)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Columns with one metadata line. In CSV the metadata is a leading
/// `# key=value ...` comment, followed by the header and the rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Table {
    pub metadata: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            metadata: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let metadata: serde_json::Map<String, Value> =
                    self.metadata.iter().map(|(k, v)| (k.clone(), v.json())).collect();
                let rows: Vec<Value> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
                let doc = json!({ "metadata": metadata, "columns": self.columns, "rows": rows });
                serde_json::to_string_pretty(&doc)
                    .map(|s| s + "\n")
                    .map_err(|e| CliError::Failure(e.to_string()))
            }
        }
    }

    fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        if !self.metadata.is_empty() {
            let meta: Vec<String> = self.metadata.iter().map(|(k, v)| format!("{k}={}", v.csv())).collect();
            out.push_str(&format!("# {}\n", meta.join(" ")));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Failure(e.to_string());
        writer.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    pub output_paths: Vec<String>,
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub(crate) fn write_outputs(
    table: &Table,
    format: Format,
    out: &Path,
    command: &str,
    parameters: BTreeMap<String, Value>,
    seed: u64,
) -> Result<PathBuf, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Failure(format!("cannot write {}: {e}", p.display()));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(out, table.render(format)?).map_err(|e| io(out, e))?;
    let manifest = RunManifest {
        command: command.to_string(),
        parameters,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        output_paths: vec![out.display().to_string()],
    };
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Failure(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
    Ok(path)
}
