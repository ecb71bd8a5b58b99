//! Result tables and their CSV/JSON forms.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64`. Non-finite values are written as `inf`, `-inf` and `nan`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => f.write_str(&fmt_f64(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl Cell {
    /// Inverse of `Display` for values produced by this module.
    pub fn parse(s: &str) -> Cell {
        match s {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            "inf" => return Cell::Num(f64::INFINITY),
            "-inf" => return Cell::Num(f64::NEG_INFINITY),
            "nan" => return Cell::Num(f64::NAN),
            _ => {}
        }
        let numeric = s
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-');
        if numeric {
            if let Ok(i) = s.parse::<i64>() {
                return Cell::Int(i);
            }
            if let Ok(v) = s.parse::<f64>() {
                return Cell::Num(v);
            }
        }
        Cell::Text(s.to_string())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    /// Equality that treats two NaNs as equal.
    fn same(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a.to_bits() == b.to_bits() || a == b,
            _ => self == other,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => {
                let n = serde_json::Number::from_str(&fmt_f64(*v))
                    .map_err(serde::ser::Error::custom)?;
                n.serialize(s)
            }
            Cell::Num(v) => s.serialize_str(&fmt_f64(*v)),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => {
                let text = n.to_string();
                let cell = Cell::parse(&text);
                match cell {
                    Cell::Num(_) | Cell::Int(_) => Ok(cell),
                    _ => Err(de::Error::custom(format!("bad number {text}"))),
                }
            }
            serde_json::Value::Bool(b) => Ok(Cell::Bool(b)),
            serde_json::Value::String(t) => Ok(match t.as_str() {
                "inf" | "-inf" | "nan" => Cell::parse(&t),
                _ => Cell::Text(t),
            }),
            other => Err(de::Error::custom(format!("unsupported cell {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub artifact_version: String,
    pub seed: Option<u64>,
    /// The resolved configuration, every value in its serialized form.
    pub config: BTreeMap<String, String>,
    /// Scalar results that do not fit the row schema.
    pub summary: BTreeMap<String, Cell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    pub schema: String,
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl PartialEq for ResultTable {
    fn eq(&self, other: &Self) -> bool {
        let cells_eq =
            |a: &[Cell], b: &[Cell]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same(y));
        self.schema == other.schema
            && self.columns == other.columns
            && self.metadata.command == other.metadata.command
            && self.metadata.artifact_version == other.metadata.artifact_version
            && self.metadata.seed == other.metadata.seed
            && self.metadata.config == other.metadata.config
            && self.metadata.summary.len() == other.metadata.summary.len()
            && self
                .metadata
                .summary
                .iter()
                .zip(&other.metadata.summary)
                .all(|((ka, va), (kb, vb))| ka == kb && va.same(vb))
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| cells_eq(a, b))
    }
}

impl ResultTable {
    pub fn new(command: &str, schema: &str, columns: &[&str]) -> Self {
        ResultTable {
            schema: schema.to_string(),
            metadata: Metadata {
                command: command.to_string(),
                artifact_version: ARTIFACT_VERSION.to_string(),
                seed: None,
                config: BTreeMap::new(),
                summary: BTreeMap::new(),
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.metadata
            .config
            .insert(key.to_string(), value.to_string());
        self
    }

    pub fn config_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.config(key, fmt_f64(value))
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.metadata.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Io(format!("malformed JSON table: {e}")))
    }

    /// Metadata as `# key = value` comment lines, then a header and the rows.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        let m = &self.metadata;
        out.push_str(&format!("# schema = {}\n", self.schema));
        out.push_str(&format!("# command = {}\n", m.command));
        out.push_str(&format!("# artifact_version = {}\n", m.artifact_version));
        if let Some(seed) = m.seed {
            out.push_str(&format!("# seed = {seed}\n"));
        }
        for (k, v) in &m.config {
            out.push_str(&format!("# config.{k} = {v}\n"));
        }
        for (k, v) in &m.summary {
            out.push_str(&format!("# summary.{k} = {v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(s: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Io(format!("malformed CSV table: {msg}"));
        let mut schema = None;
        let mut meta = Metadata {
            command: String::new(),
            artifact_version: String::new(),
            seed: None,
            config: BTreeMap::new(),
            summary: BTreeMap::new(),
        };
        let mut body = String::new();
        for line in s.lines() {
            let Some(c) = line.strip_prefix("# ") else {
                body.push_str(line);
                body.push('\n');
                continue;
            };
            let (k, v) = c
                .split_once(" = ")
                .ok_or_else(|| bad(format!("comment {line:?}")))?;
            match k {
                "schema" => schema = Some(v.to_string()),
                "command" => meta.command = v.to_string(),
                "artifact_version" => meta.artifact_version = v.to_string(),
                "seed" => meta.seed = Some(v.parse().map_err(|_| bad(format!("seed {v:?}")))?),
                _ => {
                    if let Some(k) = k.strip_prefix("config.") {
                        meta.config.insert(k.to_string(), v.to_string());
                    } else if let Some(k) = k.strip_prefix("summary.") {
                        meta.summary.insert(k.to_string(), Cell::parse(v));
                    } else {
                        return Err(bad(format!("unknown key {k:?}")));
                    }
                }
            }
        }
        let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(ResultTable {
            schema: schema.ok_or_else(|| bad("missing schema".into()))?,
            metadata: meta,
            columns,
            rows,
        })
    }
}
