//! Report tables rendered as CSV or JSON.

use std::io::Write;

use rpv_core::inference::ExtendedBound;
use rpv_core::measures::ExtendedWelfare;
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::io::csv_err;

/// A cell of a report. Possibly infinite or undefined quantities use
/// [`Cell::Ext`] so that CSV and JSON can render them differently.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Ext(Ext),
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ext {
    Finite(f64),
    Inf,
    Na,
}

impl From<ExtendedWelfare> for Ext {
    fn from(v: ExtendedWelfare) -> Self {
        match v {
            ExtendedWelfare::Finite(x) => Ext::Finite(x),
            ExtendedWelfare::PositiveInfinity => Ext::Inf,
            ExtendedWelfare::Undefined => Ext::Na,
        }
    }
}

impl From<ExtendedBound> for Ext {
    fn from(v: ExtendedBound) -> Self {
        match v {
            ExtendedBound::Finite(x) => Ext::Finite(x),
            ExtendedBound::PositiveInfinity => Ext::Inf,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Ext> for Cell {
    fn from(v: Ext) -> Self {
        Cell::Ext(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) | Cell::Ext(Ext::Finite(v)) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Ext(Ext::Inf) => "Inf".into(),
            Cell::Ext(Ext::Na) | Cell::Missing => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Ext(Ext::Finite(v)) => json!({"kind": "finite", "value": v}),
            Cell::Ext(Ext::Inf) => json!({"kind": "inf"}),
            Cell::Ext(Ext::Na) => json!({"kind": "na"}),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows plus run metadata. In CSV the metadata is repeated as trailing
/// columns on every row; in JSON it sits in a `meta` object.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(mut self, key: &'static str, value: impl Into<Cell>) -> Self {
        self.meta.push((key, value.into()));
        self
    }

    /// Value of `column` in row `row`.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        let i = self.columns.iter().position(|c| *c == column)?;
        self.rows.get(row).map(|r| &r[i])
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = self
            .columns
            .iter()
            .copied()
            .chain(self.meta.iter().map(|(k, _)| *k))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        let meta: Vec<String> = self.meta.iter().map(|(_, v)| v.csv()).collect();
        for row in &self.rows {
            let cells = row.iter().map(Cell::csv).chain(meta.iter().cloned());
            w.write_record(cells).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.to_string(), v.json()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect(),
                )
            })
            .collect();
        let doc = json!({"meta": meta, "rows": rows});
        serde_json::to_writer_pretty(&mut out, &doc)
            .map_err(|e| crate::error::CliError::input(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}
