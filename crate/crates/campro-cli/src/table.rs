//! Table emission: CSV with full float precision, Markdown with the
//! 3-decimal formatting of benchmark tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::TableFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Float(f64),
    Int(u64),
    /// A skipped or unavailable value.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Float(v) => format!("{v}"), // shortest round-trip
            Cell::Int(v) => v.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn md(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Float(v) => format!("{v:.3}"),
            Cell::Int(v) => v.to_string(),
            Cell::Missing => "-".into(),
        }
    }
}

/// Header metadata plus a rectangular body.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn push_meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Csv => self.render_csv(),
            TableFormat::Md => self.render_md(),
        }
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn render_md(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "- {k}: {v}");
        }
        if !self.meta.is_empty() {
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "| {} |", self.columns.join(" | "));
        let dashes: Vec<&str> = self.columns.iter().map(|_| "---").collect();
        let _ = writeln!(out, "| {} |", dashes.join(" | "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::md).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }

    pub fn write(&self, format: TableFormat, path: &Path) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.render(format))
    }
}
