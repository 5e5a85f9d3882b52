//! Result tables and their CSV and JSON encodings.
//!
//! CSV files start with one `#` line holding the version, command, seed and the claim under
//! test, followed by the column header and the data rows. Numbers carry nine significant
//! digits and lines end in `\n`. JSON files hold a [`Document`].

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or_else(|| Cell::Text("unknown".into()), Cell::Num)
    }
}

fn special(x: f64) -> Option<&'static str> {
    if x.is_nan() {
        Some("nan")
    } else if x == f64::INFINITY {
        Some("inf")
    } else if x == f64::NEG_INFINITY {
        Some("-inf")
    } else {
        None
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Num(x) => match special(*x) {
                Some(t) => s.serialize_str(t),
                None => s.serialize_f64(*x),
            },
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Cell::Int(i)),
                None => n.as_f64().map(Cell::Num).ok_or_else(|| de::Error::custom("number out of range")),
            },
            Value::Bool(b) => Ok(Cell::Bool(b)),
            Value::String(t) => Ok(match t.as_str() {
                "nan" => Cell::Num(f64::NAN),
                "inf" => Cell::Num(f64::INFINITY),
                "-inf" => Cell::Num(f64::NEG_INFINITY),
                _ => Cell::Text(t),
            }),
            other => Err(de::Error::custom(format!("unexpected cell {other}"))),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(x) => f.write_str(&sig9(*x)),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(t) if t.contains([',', '"', '\n']) => write!(f, "\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => f.write_str(t),
        }
    }
}

/// Nine significant digits, positional notation for moderate exponents, trailing zeros
/// removed.
pub fn sig9(x: f64) -> String {
    if let Some(t) = special(x) {
        return t.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub claim: String,
}

impl Meta {
    pub fn new(command: &str, seed: u64, claim: &str) -> Self {
        Self { version: VERSION.to_string(), command: command.to_string(), seed, claim: claim.to_string() }
    }

    fn header_line(&self) -> String {
        format!("# version={} command={} seed={} claim={}", self.version, self.command, self.seed, self.claim)
    }

    /// Inverse of the `#` line written in front of every CSV file.
    pub fn parse_header(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("# version=")?;
        let (version, rest) = rest.split_once(" command=")?;
        let (command, rest) = rest.split_once(" seed=")?;
        let (seed, claim) = rest.split_once(" claim=")?;
        Some(Self { version: version.into(), command: command.into(), seed: seed.parse().ok()?, claim: claim.into() })
    }
}

const RESERVED: [&str; 4] = ["meta", "passed", "columns", "rows"];

/// What a subcommand produces before encoding.
#[derive(Clone, Debug)]
pub struct Report {
    pub claim: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra structured fields, emitted at the top level of the JSON document.
    pub detail: Map<String, Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(claim: &'static str, columns: &[&'static str]) -> Self {
        Self { claim, columns: columns.to_vec(), rows: Vec::new(), detail: Map::new(), passed: true }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Adds a top-level JSON field; the document's own field names are reserved.
    pub fn detail(&mut self, key: &str, value: impl Serialize) -> serde_json::Result<()> {
        assert!(!RESERVED.contains(&key), "detail key {key} is reserved");
        self.detail.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn to_csv(&self, meta: &Meta) -> String {
        let mut out = meta.header_line();
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_document(&self, meta: Meta) -> Document {
        Document {
            meta,
            passed: self.passed,
            columns: self.columns.iter().map(|c| c.to_string()).collect(),
            rows: self.rows.clone(),
            detail: self.detail.clone(),
        }
    }
}

/// JSON layout: `{meta, passed, columns, rows, ...detail}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub meta: Meta,
    pub passed: bool,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(flatten)]
    pub detail: Map<String, Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(2.414213562373095), "2.41421356");
        assert_eq!(sig9(5.027339492125848), "5.02733949");
        assert_eq!(sig9(-0.000123456789012), "-0.000123456789");
        assert_eq!(sig9(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(sig9(9.9999999996), "10");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
        assert_eq!(sig9(667544.2143), "667544.214");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn header_round_trip() {
        let m = Meta::new("cotlar", 7, "u_p = cot(pi/2p), with spaces and = signs");
        assert_eq!(Meta::parse_header(&m.header_line()), Some(m));
    }

    #[test]
    fn document_round_trip() {
        let mut r = Report::new("claim", &["a", "b", "c", "d"]);
        r.push(vec![Cell::Int(3), Cell::Num(0.5), Cell::Num(f64::INFINITY), "x,y".into()]);
        r.detail("extra", [1, 2]).unwrap();
        let doc = r.to_document(Meta::new("t", 0, "claim"));
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(serde_json::from_str::<Document>(&text).unwrap(), doc);
        assert!(r.to_csv(&doc.meta).ends_with("3,0.5,inf,\"x,y\"\n"));
    }
}
