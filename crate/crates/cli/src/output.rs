use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use casimir_core::dataset::Dataset;
use casimir_core::{CasimirError, Result};
use serde_json::{Map, Value};

pub const RECORD_SCHEMA: &str = "casimir-record/1";

pub fn units_header(label: &str) -> String {
    format!("hbar*c = 1, length unit {label}")
}

fn write_with(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CasimirError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_dataset(out: Option<&Path>, ds: &Dataset) -> Result<()> {
    write_with(out, |w| ds.write_to(w))
}

/// Ordered key/value record, printed as one JSON object.
#[derive(Debug, Default)]
pub struct Record {
    fields: Map<String, Value>,
}

impl Record {
    pub fn new(command: &str, units: &str) -> Self {
        let mut r = Self::default();
        r.set("schema", RECORD_SCHEMA);
        r.set("command", command);
        r.set("units", units);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    /// Non-finite numbers have no JSON form and are written as strings.
    pub fn num(&mut self, key: &str, v: f64) {
        self.set(key, number(v));
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.fields).map_err(|e| CasimirError::Io(e.to_string()))?;
        write_with(out, |w| {
            writeln!(w, "{text}")?;
            Ok(())
        })
    }
}

pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

/// Resolved settings, echoed into both output formats.
#[derive(Debug, Default, Clone)]
pub struct ConfigEcho(pub Vec<(String, String)>);

impl ConfigEcho {
    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn apply(&self, ds: &mut Dataset) {
        for (k, v) in &self.0 {
            ds.set_meta(format!("config.{k}"), v);
        }
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
    }
}
