//! Ordered output records rendered as JSON, CSV or plain text.
//!
//! Reals are always printed with 12 significant digits (`%.12g` layout), so
//! identical runs produce identical bytes regardless of platform float
//! printing.

use std::io::{self, Write};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

#[derive(Clone, Debug)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
    List(Vec<Field>),
    Obj(Report),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as u64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Flag(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}

impl From<Report> for Field {
    fn from(x: Report) -> Self {
        Field::Obj(x)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    /// `None` renders as JSON `null` (carried as a non-finite number).
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Num(f64::NAN), Into::into)
    }
}

/// Key/value pairs in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Report(Vec<(String, Field)>);

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Field>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Flattened `(dotted.key, cell)` pairs; lists become JSON cells.
    fn cells(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.flatten("", &mut out);
        out
    }

    fn flatten(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        for (k, v) in &self.0 {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Field::Obj(r) => r.flatten(&key, out),
                Field::List(_) => out.push((key, serde_json::to_string(v).expect("list serializes"))),
                scalar => out.push((key, cell(scalar))),
            }
        }
    }

    pub fn write_csv(&self, w: impl Write) -> io::Result<()> {
        let cells = self.cells();
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(cells.iter().map(|(k, _)| k))?;
        csv.write_record(cells.iter().map(|(_, v)| v))?;
        csv.flush()
    }

    pub fn write_text(&self, mut w: impl Write) -> io::Result<()> {
        let cells = self.cells();
        let pad = cells.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in cells {
            writeln!(w, "{k:<pad$}  {v}")?;
        }
        Ok(())
    }
}

fn cell(f: &Field) -> String {
    match f {
        Field::Num(x) => g12(*x),
        Field::Int(x) => x.to_string(),
        Field::Text(s) => s.clone(),
        Field::Flag(b) => b.to_string(),
        Field::List(_) | Field::Obj(_) => serde_json::to_string(f).expect("field serializes"),
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Num(x) if x.is_finite() => {
                RawValue::from_string(g12(*x)).expect("valid JSON number").serialize(s)
            }
            Field::Num(_) => s.serialize_none(),
            Field::Int(x) => s.serialize_u64(*x),
            Field::Text(t) => s.serialize_str(t),
            Field::Flag(b) => s.serialize_bool(*b),
            Field::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Field::Obj(r) => r.serialize(s),
        }
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// `x` with 12 significant digits in `%.12g` layout: fixed notation for
/// decimal exponents in `[-5, 12)`, scientific otherwise, trailing zeros
/// trimmed. Non-finite values print as `inf`, `-inf` or `nan`.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if neg { "-" } else { "" };
    if !(-5..12).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        let dot = if frac.is_empty() { "" } else { "." };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{}{dot}{frac}e{esign}{:02}", &digits[..1], exp.abs());
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let frac = digits[split..].trim_end_matches('0');
        if frac.is_empty() {
            digits[..split].to_string()
        } else {
            format!("{}.{frac}", &digits[..split])
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{}", digits.trim_end_matches('0'))
    };
    format!("{sign}{body}")
}
