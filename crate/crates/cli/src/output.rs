//! Tabular output in the versioned CSV and JSON schemas.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{json, Value};
use splitlab::Real;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits of every extended-precision cell.
pub const DIGITS: usize = 36;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(Real),
    Int(i64),
    Text(String),
    /// No value; written as `nan` in CSV and `null` in JSON.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(r) => r.to_sci(DIGITS),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "nan".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // strings keep all digits; JSON numbers would round to f64
            Cell::Num(r) => Value::String(r.to_sci(DIGITS)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<Real> for Cell {
    fn from(r: Real) -> Self {
        Cell::Num(r)
    }
}

impl From<&Real> for Cell {
    fn from(r: &Real) -> Self {
        Cell::Num(r.clone())
    }
}

impl From<Option<&Real>> for Cell {
    fn from(r: Option<&Real>) -> Self {
        r.map_or(Cell::Missing, Cell::from)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub command: &'static str,
    /// `key: value` pairs recorded as comments; must not depend on the
    /// thread count or output path.
    pub provenance: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, provenance: Vec<(String, String)>, columns: &[&'static str]) -> Self {
        Table { command, provenance, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# splitlab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(buf, "# schema_version: {SCHEMA_VERSION}")?;
        writeln!(buf, "# command: {}", self.command)?;
        for (k, v) in &self.provenance {
            writeln!(buf, "# {k}: {v}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    fn to_json(&self) -> CliResult<Vec<u8>> {
        let provenance: serde_json::Map<String, Value> =
            self.provenance.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "generator": format!("splitlab {}", env!("CARGO_PKG_VERSION")),
            "command": self.command,
            "provenance": provenance,
            "columns": self.columns,
            "rows": rows,
        });
        let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use splitlab::Precision;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec![("mu".into(), "0.7".into())], &["x", "n", "tag", "gap"]);
        t.push(vec![Real::ratio(Precision::QUAD, 1, 4).into(), 3usize.into(), "a".into(), Cell::Missing]);
        t
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().render(Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert!(lines[0].starts_with("# splitlab "));
        assert_eq!(lines[1], "# schema_version: 1");
        assert_eq!(lines[2], "# command: demo");
        assert_eq!(lines[3], "# mu: 0.7");
        assert_eq!(lines[4], "x,n,tag,gap");
        assert_eq!(lines[5], "2.50000000000000000000000000000000000e-1,3,a,nan");
        assert_eq!(lines[6], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&sample().render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["columns"][2], "tag");
        assert_eq!(v["rows"][0][0], "2.50000000000000000000000000000000000e-1");
        assert_eq!(v["rows"][0][1], 3);
        assert!(v["rows"][0][3].is_null());
        assert_eq!(v["provenance"]["mu"], "0.7");
    }
}
