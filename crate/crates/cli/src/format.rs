use std::fs;
use std::path::Path;

use serde_json::{Map, Number, Value as Json};

use crate::config::{Format, OutputTarget};
use crate::error::{CliError, Result};

/// Significant digits kept in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Magnitudes below this are written as 0 so rounding noise never reaches
/// an output file.
pub const ZERO_SNAP: f64 = 1e-13;

/// Formats `x` with 12 significant digits, `%g` style.
pub fn fmt12(x: f64) -> String {
    if x.abs() < ZERO_SNAP {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa))
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    pub fn opt_num(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt12(*x),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => (*b as u8).to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Int(i) => Json::from(*i),
            Cell::Num(x) => Number::from_f64(round12(*x)).map_or(Json::Null, Json::Number),
            Cell::Text(s) => Json::from(s.as_str()),
            Cell::Flag(b) => Json::Bool(*b),
            Cell::Empty => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let failed = |e: csv::Error| CliError::Invariant(format!("csv encoding failed: {e}"));
        writer.write_record(&self.columns).map_err(failed)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render)).map_err(failed)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Invariant(format!("csv encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Invariant(e.to_string()))
    }

    /// Rows as an array of objects keyed by column name.
    pub fn to_json(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|row| {
                    let object: Map<String, Json> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                    Json::Object(object)
                })
                .collect(),
        )
    }

    /// Space-aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let padded: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&mut self.columns.iter().map(String::as_str));
        for row in &rendered {
            out += &line(&mut row.iter().map(String::as_str));
        }
        out
    }
}

/// What a command produced: text for the terminal, the CSV payload and the
/// JSON document for file output, plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub table: Table,
    pub json: Json,
    /// Advisory messages for standard error.
    pub warnings: Vec<String>,
    /// Failed invariants; any entry makes the process exit with status 1.
    pub violations: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => serde_json::to_string_pretty(&self.json)
                .map(|s| s + "\n")
                .map_err(|e| CliError::Invariant(format!("json encoding failed: {e}"))),
        }
    }

    pub fn write(&self, target: &OutputTarget) -> Result<()> {
        write_file(&target.path, &self.render(target.format)?)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(-3e-17), "0");
        assert_eq!(fmt12(2e-13), "2e-13");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt12(-123456.789), "-123456.789");
        assert_eq!(fmt12(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt12(0.99999999999999), "1");
        assert_eq!(fmt12(2.5e15), "2.5e15");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn csv_and_text_layout() {
        let mut t = Table::new(["n", "x", "flag"]);
        t.push(vec![Cell::Int(1), Cell::Num(0.25), Cell::Flag(true)]);
        t.push(vec![Cell::Int(10), Cell::Empty, Cell::Flag(false)]);
        assert_eq!(t.to_csv().unwrap(), "n,x,flag\n1,0.25,1\n10,,0\n");
        assert_eq!(t.to_text(), " n     x  flag\n 1  0.25     1\n10           0\n");
        assert_eq!(t.to_json()[1]["x"], Json::Null);
    }
}
