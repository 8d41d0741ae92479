//! Plot-ready numeric tables with a commented, versioned header.
//!
//! ```text
//! # schema: casimir-dataset/1
//! # units: hbar*c = 1, length unit R
//! # config.command: dipole-scan
//! x,f_E,f_M
//! 0.2,-3.4,4.9
//! ```
//!
//! Values are written in the shortest form that parses back to the same
//! `f64`, so a write/read cycle is exact.

use std::io::{BufRead, Write};

use crate::analysis::SeriesSample;
use crate::error::{CasimirError, Result};

pub const SCHEMA: &str = "casimir-dataset/1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    /// Header entries in insertion order, excluding the schema line.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set_meta(key, value);
        self
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CasimirError::InvalidInput(format!(
                "row has {} values but the dataset has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column_index(name)
            .ok_or_else(|| CasimirError::InvalidInput(format!("dataset has no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Samples from an abscissa column, a value column and an optional sigma
    /// column (sigma 0 when absent).
    pub fn samples(&self, abscissa: &str, value: &str, sigma: Option<&str>) -> Result<Vec<SeriesSample>> {
        let x = self.column(abscissa)?;
        let v = self.column(value)?;
        let s = match sigma {
            Some(name) => self.column(name)?,
            None => vec![0.0; x.len()],
        };
        Ok(x.into_iter()
            .zip(v)
            .zip(s)
            .map(|((x, v), s)| SeriesSample { abscissa: x, value: v, sigma: s })
            .collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# schema: {SCHEMA}")?;
        for (k, v) in &self.metadata {
            if k.contains(':') || k.contains('\n') || v.contains('\n') {
                return Err(CasimirError::InvalidInput(format!("metadata entry `{k}` cannot be written")));
            }
            writeln!(w, "# {k}: {v}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&v| format_value(v))).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| CasimirError::Io(e.to_string()))
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut body = String::new();
        let mut schema = None;
        for line in r.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                let Some((k, v)) = rest.split_once(':') else {
                    continue;
                };
                let (k, v) = (k.trim(), v.trim());
                if k == "schema" {
                    schema = Some(v.to_string());
                } else {
                    metadata.push((k.to_string(), v.to_string()));
                }
            } else if !line.trim().is_empty() {
                body.push_str(&line);
                body.push('\n');
            }
        }
        match schema.as_deref() {
            Some(SCHEMA) => {}
            Some(other) => return Err(CasimirError::InvalidInput(format!("unsupported dataset schema `{other}`"))),
            None => return Err(CasimirError::InvalidInput("dataset is missing its `# schema:` header".into())),
        }
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = rd.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        CasimirError::InvalidInput(format!("row {}: `{f}` is not a number", n + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(CasimirError::InvalidInput(format!("row {} has {} fields", n + 1, row.len())));
            }
            rows.push(row);
        }
        Ok(Self { metadata, columns, rows })
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }
}

/// Shortest round-tripping form, switching to exponent notation for very
/// small or large magnitudes.
fn format_value(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || (1e-4..1e15).contains(&m) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn csv_error(e: csv::Error) -> CasimirError {
    CasimirError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut d = Dataset::new(["x", "y"]).with_meta("units", "hbar*c = 1, length unit R").with_meta("config.tol", 1e-8);
        d.push_row(vec![0.1, -1.0 / 3.0]).unwrap();
        d.push_row(vec![1e-300, f64::MAX]).unwrap();
        let s = d.to_csv_string().unwrap();
        assert!(s.contains("\n1e-300,1.7976931348623157e308\n"));
        assert!(s.starts_with("# schema: casimir-dataset/1\n"));
        assert_eq!(Dataset::from_csv_str(&s).unwrap(), d);
    }

    #[test]
    fn rejects_unknown_schema_and_ragged_rows() {
        assert!(Dataset::from_csv_str("x\n1\n").is_err());
        assert!(Dataset::from_csv_str("# schema: other/2\nx\n1\n").is_err());
        assert!(Dataset::from_csv_str("# schema: casimir-dataset/1\nx,y\n1\n").is_err());
        assert!(Dataset::new(["a"]).push_row(vec![1.0, 2.0]).is_err());
    }
}
