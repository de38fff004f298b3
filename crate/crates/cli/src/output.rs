//! CSV tables, JSON reports and the field sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use okounkov_core::envelope::ChebyshevField;
use serde::Serialize;

use crate::CliError;

/// A CSV table held in memory until the run succeeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Shortest round-trip formatting, so equal values give equal bytes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Grid coordinates, value and missing flag for each non-outside node.
pub fn field_table(name: &str, field: &ChebyshevField<f64>) -> Table {
    let dim = field.dim();
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    header.push("missing".into());
    let mut t = Table { name: name.into(), header, rows: Vec::new() };
    for (x, v) in field.interior() {
        let mut row: Vec<String> = x.iter().map(|c| num(*c)).collect();
        row.push(opt(v));
        row.push(if v.is_some() { "0" } else { "1" }.into());
        t.rows.push(row);
    }
    t
}

/// Metadata written next to a field table.
#[derive(Serialize)]
pub struct FieldMeta<'a> {
    pub table: &'a str,
    pub body_vertices: &'a [Vec<f64>],
    pub spacing: f64,
    pub margin_cells: usize,
    pub horizon: Option<u32>,
    pub convexified: bool,
    pub missing: usize,
}

impl<'a> FieldMeta<'a> {
    pub fn of(table: &'a str, field: &'a ChebyshevField<f64>) -> Self {
        Self {
            table,
            body_vertices: &field.body.vertices,
            spacing: field.spacing,
            margin_cells: field.margin_cells,
            horizon: field.horizon,
            convexified: field.convexified,
            missing: field.missing_count(),
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let bad = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(bad)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(bad)?.iter().map(String::from).collect());
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Table { name, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.5e-300, 1.0 / 3.0, 2.0, 1e20, 3e-7] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt(None), "");
        assert_eq!(num(1.5e-300), "1.5e-300");
    }

    #[test]
    fn tables_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t.csv", &["k", "value"]);
        t.push(vec!["1".into(), num(0.25)]);
        t.push(vec!["2".into(), String::new()]);
        let path = t.write(dir.path()).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back, t);
    }
}
