use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_f64(*x)),
                    Cell::Int(n) => write!(out, "{n}").expect("string write"),
                    Cell::Text(s) => out.push_str(&quote(s)),
                    Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// What a command hands back: data rows, a JSON summary, and whether every
/// requested check held.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: serde_json::Value,
    pub passed: bool,
    /// One human-readable line for stderr.
    pub status: String,
}

/// Where the CSV and JSON go. `--out x.csv` writes `x.csv` and `x.json`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Destinations {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Destinations {
    pub fn from_out(out: &Path) -> Self {
        let is_json = out.extension().is_some_and(|e| e == "json");
        let (csv, json) = if is_json {
            (out.with_extension("csv"), out.to_path_buf())
        } else {
            (out.to_path_buf(), out.with_extension("json"))
        };
        Self {
            csv: Some(csv),
            json: Some(json),
        }
    }
}

/// Writes the report; without a CSV path the rows go to stdout.
pub fn emit(report: &Report, dest: &Destinations) -> Result<()> {
    let csv = report.table.to_csv();
    match &dest.csv {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &dest.json {
        let mut text =
            serde_json::to_string_pretty(&report.summary).expect("JSON values serialize");
        text.push('\n');
        write(p, &text)?;
    }
    eprintln!("{}", report.status);
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn text_cells_are_quoted() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x, y".into(), Cell::Int(3)]);
        assert_eq!(t.to_csv(), "a,b\n\"x, y\",3\n");
    }

    #[test]
    fn out_path_names_both_files() {
        let d = Destinations::from_out(Path::new("run/sweep.csv"));
        assert_eq!(d.json.as_deref(), Some(Path::new("run/sweep.json")));
        let d = Destinations::from_out(Path::new("run/sweep.json"));
        assert_eq!(d.csv.as_deref(), Some(Path::new("run/sweep.csv")));
    }
}
