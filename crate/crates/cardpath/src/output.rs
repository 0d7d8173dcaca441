//! CSV and JSON writers. CSV files use `.` decimals, `\n` line endings and
//! always start with a header row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cardpath_core::lattice::{LatticePath, TimeGrid};
use serde::Serialize;

use crate::error::CliError;

/// Float with 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn rows(&self) -> usize {
        self.text.lines().count() - 1
    }
}

/// `t,r` rows of a lattice path.
pub fn path_csv(path: &LatticePath, grid: &TimeGrid) -> Csv {
    let mut csv = Csv::new(&["t", "r"]);
    for (i, r) in path.sites().iter().enumerate() {
        csv.row(&[float(grid.time(i)), float(*r)]);
    }
    csv
}

/// Parses a CSV produced by [`Csv`] back into its header and rows.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().map(|h| h.split(',').map(str::to_owned).collect()).unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable record");
    let _ = writeln!(s);
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        assert_eq!(c.as_str(), "a,b\n");
        c.row(&[float(1.0), String::new()]);
        assert_eq!(c.rows(), 1);
        let (h, rows) = parse_csv(c.as_str());
        assert_eq!(h, ["a", "b"]);
        assert_eq!(rows[0][1], "");
        assert!(!c.as_str().contains('\r'));
    }

    #[test]
    fn path_rows() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let p = LatticePath::straight(0.0, 2.0, 4);
        let (h, rows) = parse_csv(path_csv(&p, &g).as_str());
        assert_eq!(h, ["t", "r"]);
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[2][1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(rows[4][0].parse::<f64>().unwrap(), 1.0);
    }
}
