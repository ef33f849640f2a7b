//! CSV, SVG and JSON-lines artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dfkg_core::verify::CheckResult;

use crate::CliError;

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
        }
    }
}

/// CSV table with `# key = value` header lines echoing the configuration.
pub struct Table {
    header: Vec<&'static str>,
    meta: Vec<String>,
    rows: Vec<Vec<Cell>>,
    trailer: Vec<String>,
}

impl Table {
    pub fn new(command: &str, config: Vec<String>, header: Vec<&'static str>) -> Self {
        let mut meta = vec![format!("command = \"{command}\""), format!("version = \"{}\"", env!("CARGO_PKG_VERSION"))];
        meta.extend(config);
        Self { header, meta, rows: Vec::new(), trailer: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comment line after the data rows.
    pub fn trailer(&mut self, line: String) {
        self.trailer.push(line);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for t in &self.trailer {
            let _ = writeln!(out, "# {t}");
        }
        out
    }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Config(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_summary(&self, checks: &[CheckResult]) -> Result<PathBuf, CliError> {
        self.write("summary.jsonl", &summary_lines(checks))
    }
}

pub fn summary_lines(checks: &[CheckResult]) -> String {
    checks
        .iter()
        .map(|c| serde_json::to_string(c).expect("check results serialize") + "\n")
        .collect()
}

/// Reads JSON-lines summaries; a directory stands for its `summary.jsonl`.
pub fn read_summary(path: &Path) -> Result<Vec<CheckResult>, CliError> {
    let file = if path.is_dir() { path.join("summary.jsonl") } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|e| CliError::Config(format!("cannot read {}: {e}", file.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let v: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", file.display(), i + 1)))?;
            let field = |name: &str| v.get(name).and_then(|x| x.as_str()).unwrap_or_default().to_string();
            let pass = v.get("pass").and_then(|x| x.as_bool()).ok_or_else(|| {
                CliError::Config(format!("{}:{}: missing boolean `pass`", file.display(), i + 1))
            })?;
            Ok(CheckResult::evaluated(
                &field("name"),
                &field("paper_ref"),
                &field("expected"),
                &field("tolerance"),
                field("measured"),
                pass,
            ))
        })
        .collect()
}
