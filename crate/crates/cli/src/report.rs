//! Report rendering: CSV with echoed configuration, and a JSON mirror.

use std::fmt::Write as _;

use dioph_core::ExactReal;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, ECHO_PREFIX};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const VERSION_PREFIX: &str = "# dioph-report";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Exact value: `num/den` for rationals, a grammar string otherwise.
    Exact(String),
    Real(f64),
    Int(i128),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn rational(r: &BigRational) -> Cell {
        Cell::Exact(format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn exact(x: &ExactReal) -> Cell {
        match x.as_rational() {
            Some(r) => Cell::rational(&r),
            None => Cell::Exact(x.to_string()),
        }
    }

    pub fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> Cell) -> Cell {
        v.map(f).unwrap_or(Cell::Empty)
    }

    pub fn ints(v: &[i64]) -> Cell {
        Cell::Text(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
    }

    fn csv(&self) -> String {
        match self {
            Cell::Exact(s) | Cell::Text(s) => quote(s),
            Cell::Real(x) => real(*x),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Exact(s) | Cell::Text(s) => Value::String(s.clone()),
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => Value::String(real(*x)),
            Cell::Int(v) => match i64::try_from(*v) {
                Ok(v) => json!(v),
                Err(_) => Value::String(v.to_string()),
            },
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Shortest round-trip decimal; non-finite values as `inf`, `-inf`, `nan`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Report {
        Report { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Settings echoed into the report: every resolved key except the
    /// output path, which names the report itself.
    fn echo(cfg: &RunConfig) -> Vec<(String, String)> {
        let mut out = vec![("verb".to_string(), cfg.verb_name())];
        out.extend(cfg.values.iter().filter(|(k, _)| k != "out").cloned());
        out
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut s = format!("{VERSION_PREFIX} {VERSION}\n");
        for (k, v) in Self::echo(cfg) {
            let _ = writeln!(s, "{ECHO_PREFIX} {k} = {v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let mut config = Map::new();
        for (k, v) in Self::echo(cfg) {
            config.insert(k, Value::String(v));
        }
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({
            "version": VERSION,
            "config": Value::Object(config),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
