//! Output records. Field order is insertion order, and numbers use the
//! shortest decimal text that reads back to the same f64.

use serde_json::{Map, Value};
use thetaquad::{QuadError, Result};

use crate::args::Format;

pub const SCHEMA_VERSION: &str = "1";

pub struct Record {
    command: &'static str,
    inputs: Map<String, Value>,
    results: Map<String, Value>,
}

impl Record {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            inputs: Map::new(),
            results: Map::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("command".into(), self.command.into());
        root.insert("inputs".into(), Value::Object(self.inputs.clone()));
        root.insert("results".into(), Value::Object(self.results.clone()));
        let mut text = serde_json::to_string_pretty(&Value::Object(root))
            .expect("serialising a JSON value cannot fail");
        text.push('\n');
        text
    }

    /// Header of result names and a single row of values.
    pub fn to_csv(&self) -> Result<String> {
        let header: Vec<String> = self.results.keys().cloned().collect();
        let row: Vec<Value> = self.results.values().cloned().collect();
        table_csv(&header, &[row])
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn table_csv(header: &[String], rows: &[Vec<Value>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| QuadError::Validation(format!("csv output failed: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(cell)).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| QuadError::Validation(format!("csv output failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| QuadError::Validation(e.to_string()))
}

/// A finite f64 as a JSON number, anything else as null.
pub fn num(x: f64) -> Value {
    Value::from(x)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}
