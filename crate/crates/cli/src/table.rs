//! Tabular output shared by all subcommands: CSV or `{"meta", "rows"}` JSON,
//! rendered from the same cells so both formats carry identical values.

use serde_json::{Map, Number, Value};
use topoquant::expr::format_number;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    /// Written as `undefined` in CSV and `null` in JSON.
    Undefined,
}

impl Cell {
    pub fn opt(value: Option<f64>) -> Self {
        value.map_or(Cell::Undefined, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(normalize(*x)),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => quote(s),
            Cell::Undefined => "undefined".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(normalize(*x)).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Undefined => Value::Null,
        }
    }
}

// -0 would print differently from 0 without being a different value
fn normalize(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, meta: Value) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(meta),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: Value) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("meta".into(), meta);
        top.insert("rows".into(), Value::Array(rows));
        let mut out = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values are always serializable");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(-0.0), Cell::Undefined, Cell::Text("x,y".into())]);
        t.push(vec![Cell::Num(1e-7), Cell::Int(3), Cell::Bool(true)]);
        assert_eq!(t.to_csv(), "a,b,c\n0,undefined,\"x,y\"\n1e-7,3,true\n");
        let v: Value = serde_json::from_str(&t.to_json(Value::Null)).unwrap();
        assert_eq!(v["rows"][0]["b"], Value::Null);
        assert_eq!(v["rows"][1]["a"].as_f64(), Some(1e-7));
    }
}
