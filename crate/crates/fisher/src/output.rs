//! Machine-readable result documents: JSON, CSV and aligned text tables.
//!
//! Every float passes through [`round_sig`] so that identical inputs give
//! byte-identical output.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept when serialising floats.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// `v` rounded to [`SIGNIFICANT_DIGITS`]; printing then uses the shortest
/// representation that round-trips the rounded value.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Conversion into a JSON field with float rounding applied.
pub trait IntoField {
    fn into_field(self) -> Value;
}

impl IntoField for f64 {
    fn into_field(self) -> Value {
        // non-finite floats become null
        Value::from(round_sig(self))
    }
}

impl IntoField for Option<f64> {
    fn into_field(self) -> Value {
        self.map_or(Value::Null, IntoField::into_field)
    }
}

impl IntoField for Vec<f64> {
    fn into_field(self) -> Value {
        Value::Array(self.into_iter().map(IntoField::into_field).collect())
    }
}

impl IntoField for &[f64] {
    fn into_field(self) -> Value {
        self.to_vec().into_field()
    }
}

macro_rules! plain_field {
    ($($t:ty),*) => {
        $(impl IntoField for $t {
            fn into_field(self) -> Value {
                Value::from(self)
            }
        })*
    };
}

plain_field!(u32, u64, usize, i64, bool, &str, String);

/// Ordered key/value record.
pub type Record = Map<String, Value>;

/// Builds a [`Record`] preserving key order.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut r = $crate::output::Record::new();
        $(r.insert(::std::string::String::from($k), $crate::output::IntoField::into_field($v));)*
        r
    }};
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub records: Vec<Record>,
}

/// Output of one subcommand: one or more named tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: &'static str,
    pub tables: Vec<Table>,
}

impl Document {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            tables: Vec::new(),
        }
    }

    pub fn table(mut self, name: &'static str, records: Vec<Record>) -> Self {
        self.tables.push(Table { name, records });
        self
    }

    pub fn get(&self, name: &str) -> Option<&[Record]> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.records.as_slice())
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        root.insert("command".into(), Value::from(self.command));
        for t in &self.tables {
            root.insert(
                t.name.into(),
                Value::Array(t.records.iter().cloned().map(Value::Object).collect()),
            );
        }
        Value::Object(root)
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.render_csv(),
            Format::Table => Ok(self.render_table()),
        }
    }

    /// One CSV block per table; with several tables each block is preceded
    /// by a `# name` line and separated by a blank line.
    fn render_csv(&self) -> CliResult<String> {
        let mut out = String::new();
        let titled = self.tables.len() > 1;
        for (k, t) in self.tables.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            if titled {
                writeln!(out, "# {}", t.name).ok();
            }
            let cols = columns(&t.records);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&cols)?;
            for r in &t.records {
                w.write_record(cols.iter().map(|c| cell(r.get(c))))?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            out.push_str(&String::from_utf8_lossy(&bytes));
        }
        Ok(out)
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for (k, t) in self.tables.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            writeln!(out, "[{}]", t.name).ok();
            let cols = columns(&t.records);
            let rows: Vec<Vec<String>> = t
                .records
                .iter()
                .map(|r| cols.iter().map(|c| cell(r.get(c))).collect())
                .collect();
            let widths: Vec<usize> = cols
                .iter()
                .enumerate()
                .map(|(i, c)| rows.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| -> String {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(&cols)).ok();
            for r in &rows {
                writeln!(out, "{}", line(r)).ok();
            }
        }
        out
    }
}

/// Union of record keys in first-seen order.
fn columns(records: &[Record]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| cell(Some(i)))
            .collect::<Vec<_>>()
            .join(";"),
        Some(other) => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.5e-17), -2.5e-17);
        assert!(round_sig(f64::NAN).is_nan());
        assert_eq!(Value::from(round_sig(0.052_892_814_676_543_21)).to_string(), "0.0528928146765");
    }

    #[test]
    fn json_has_schema_and_order() {
        let doc = Document::new("demo").table("records", vec![record! {"b" => 1.0, "a" => f64::NAN}]);
        let s = doc.render(Format::Json).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!(v["records"][0]["a"].is_null());
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
    }

    #[test]
    fn csv_flattens_arrays() {
        let doc = Document::new("demo").table(
            "records",
            vec![record! {"order" => 1u32, "entries" => vec![1.0, 0.0, 0.0, 2.0]}],
        );
        assert_eq!(doc.render(Format::Csv).unwrap(), "order,entries\n1,1.0;0.0;0.0;2.0\n");
        let multi = doc.clone().table("summary", vec![record! {"ok" => true}]);
        let csv = multi.render(Format::Csv).unwrap();
        assert!(csv.starts_with("# records\n") && csv.contains("\n\n# summary\nok\ntrue\n"));
    }

    #[test]
    fn table_aligns_columns() {
        let doc = Document::new("demo").table(
            "t",
            vec![record! {"name" => "x", "value" => 10.5}, record! {"name" => "long", "value" => 1.0}],
        );
        assert_eq!(doc.render(Format::Table).unwrap(), "[t]\nname  value\nx     10.5\nlong  1.0\n");
    }
}
