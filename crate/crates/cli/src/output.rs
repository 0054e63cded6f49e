//! Result tables and their CSV/JSON renderings.
//!
//! Every float is first rounded to 10 significant digits and then printed
//! as the shortest decimal that reads back to the rounded value, so output
//! is stable across platforms and cache round trips.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Empty,
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x.into())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<String>> for Cell {
    fn from(x: Option<String>) -> Self {
        x.map_or(Cell::Empty, Cell::Text)
    }
}

pub fn round10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    format!("{:?}", round10(x))
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => serde_json::Number::from_f64(round10(*x)).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results that are not per-row (fits, summaries).
    pub notes: Vec<(String, Cell)>,
    /// What the units in the column names mean.
    pub units: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn unit(&mut self, line: &str) {
        self.units.push(line.into());
    }
}

/// Header fields written ahead of every table.
pub struct Meta<'a> {
    pub command: &'a str,
    pub config_hash: &'a str,
}

pub fn to_csv(table: &Table, meta: &Meta) -> String {
    let mut out = String::new();
    out.push_str(&format!("# trionlab {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command: {}\n", meta.command));
    out.push_str(&format!("# config: {}\n", meta.config_hash));
    for u in &table.units {
        out.push_str(&format!("# units: {u}\n"));
    }
    for (k, v) in &table.notes {
        out.push_str(&format!("# {k}: {}\n", v.text()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
    out
}

pub fn to_json(table: &Table, meta: &Meta) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Object(table.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect::<Map<_, _>>()))
        .collect();
    let notes: Map<String, Value> = table.notes.iter().map(|(k, v)| (k.clone(), v.json())).collect();
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": meta.command,
        "config": meta.config_hash,
        "units": table.units,
        "notes": notes,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serialisable");
    s.push('\n');
    s
}
