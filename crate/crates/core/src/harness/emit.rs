//! Result rows and their CSV / JSON-lines encodings.

use std::io::{BufRead, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

pub const HEADER: [&str; 12] = [
    "experiment",
    "scheme",
    "n",
    "t_final",
    "l2_error",
    "h1_error",
    "rho_l2_error",
    "runtime_seconds",
    "energy_deviation",
    "momentum_deviation",
    "accepted_steps",
    "rejected_steps",
];

/// Failed rows carry this prefix in the `l2_error` cell.
pub const ERROR_MARKER: &str = "error: ";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub scheme: String,
    pub n: usize,
    pub t_final: f64,
    pub l2_error: Option<f64>,
    pub h1_error: Option<f64>,
    pub rho_l2_error: Option<f64>,
    pub runtime_seconds: Option<f64>,
    pub energy_deviation: Option<f64>,
    pub momentum_deviation: Option<f64>,
    pub accepted_steps: Option<u64>,
    pub rejected_steps: Option<u64>,
    pub failure: Option<String>,
}

impl ResultRow {
    pub fn failed(experiment: &str, scheme: &str, n: usize, t_final: f64, why: String) -> Self {
        Self {
            experiment: experiment.into(),
            scheme: scheme.into(),
            n,
            t_final,
            l2_error: None,
            h1_error: None,
            rho_l2_error: None,
            runtime_seconds: None,
            energy_deviation: None,
            momentum_deviation: None,
            accepted_steps: None,
            rejected_steps: None,
            failure: Some(why),
        }
    }

    /// Ordered cells as text; `None` becomes the empty string.
    fn cells(&self) -> Vec<Cell> {
        let f = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Float);
        let i = |v: Option<u64>| v.map_or(Cell::Empty, Cell::Int);
        let l2 = match &self.failure {
            Some(msg) => Cell::Text(format!("{ERROR_MARKER}{}", msg.replace(['\n', '\r'], " "))),
            None => f(self.l2_error),
        };
        vec![
            Cell::Text(self.experiment.clone()),
            Cell::Text(self.scheme.clone()),
            Cell::Int(self.n as u64),
            Cell::Float(self.t_final),
            l2,
            f(self.h1_error),
            f(self.rho_l2_error),
            f(self.runtime_seconds),
            f(self.energy_deviation),
            f(self.momentum_deviation),
            i(self.accepted_steps),
            i(self.rejected_steps),
        ]
    }

    fn from_cells(c: &[String]) -> Result<Self> {
        if c.len() != HEADER.len() {
            return Err(Error::Parse(format!("row has {} fields, want {}", c.len(), HEADER.len())));
        }
        let f = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>().map(Some).map_err(|e| Error::Parse(format!("'{s}': {e}")))
            }
        };
        let i = |s: &str| -> Result<Option<u64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<u64>().map(Some).map_err(|e| Error::Parse(format!("'{s}': {e}")))
            }
        };
        let (l2_error, failure) = match c[4].strip_prefix(ERROR_MARKER) {
            Some(msg) => (None, Some(msg.to_string())),
            None => (f(&c[4])?, None),
        };
        Ok(Self {
            experiment: c[0].clone(),
            scheme: c[1].clone(),
            n: i(&c[2])?.ok_or_else(|| Error::Parse("missing n".into()))? as usize,
            t_final: f(&c[3])?.ok_or_else(|| Error::Parse("missing t_final".into()))?,
            l2_error,
            h1_error: f(&c[5])?,
            rho_l2_error: f(&c[6])?,
            runtime_seconds: f(&c[7])?,
            energy_deviation: f(&c[8])?,
            momentum_deviation: f(&c[9])?,
            accepted_steps: i(&c[10])?,
            rejected_steps: i(&c[11])?,
            failure,
        })
    }
}

enum Cell {
    Empty,
    Text(String),
    Int(u64),
    Float(f64),
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Empty => "null".into(),
            Cell::Text(s) => Value::String(s.clone()).to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(v) => Value::String(format_float(*v)).to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(out);
            w.write_record(HEADER).map_err(csv_err)?;
            for r in rows {
                w.write_record(r.cells().iter().map(Cell::csv)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = std::io::BufWriter::new(out);
            for r in rows {
                let body: Vec<String> = HEADER
                    .iter()
                    .zip(r.cells())
                    .map(|(k, c)| format!("\"{k}\":{}", c.json()))
                    .collect();
                writeln!(out, "{{{}}}", body.join(","))?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_rows(rows, format, file)
}

pub fn read_rows<R: BufRead>(input: R, format: Format) -> Result<Vec<ResultRow>> {
    match format {
        Format::Csv => {
            let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
            let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
            if header != HEADER {
                return Err(Error::Parse(format!("unexpected header {header:?}")));
            }
            rd.records()
                .map(|rec| {
                    let rec = rec.map_err(csv_err)?;
                    ResultRow::from_cells(&rec.iter().map(String::from).collect::<Vec<_>>())
                })
                .collect()
        }
        Format::Jsonl => input
            .lines()
            .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
            .map(|line| {
                let line = line?;
                let v: serde_json::Map<String, Value> =
                    serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()))?;
                let cells: Vec<String> = HEADER
                    .iter()
                    .map(|k| match v.get(*k) {
                        None | Some(Value::Null) => String::new(),
                        Some(Value::String(s)) => s.clone(),
                        Some(Value::Number(x)) => x.to_string(),
                        Some(other) => other.to_string(),
                    })
                    .collect();
                ResultRow::from_cells(&cells)
            })
            .collect(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
