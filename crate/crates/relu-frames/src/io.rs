//! CSV and JSON readers and writers for frames, biases and point sets.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Bias, Frame};

/// Serde helper writing non-finite entries as `"inf"`, `"-inf"` or `"nan"`.
pub mod inf_vec {
    use serde::de::{self, SeqAccess, Visitor};
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if x.is_finite() {
                seq.serialize_element(x)?;
            } else {
                seq.serialize_element(super::non_finite_name(*x))?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vec<f64>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an array of numbers or \"inf\" strings")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(e) = seq.next_element::<super::Number>()? {
                    out.push(e.0);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(V).map_err(de::Error::custom)
    }
}

/// Same as [`inf_vec`] for a single value.
pub mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(super::non_finite_name(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(super::Number::deserialize(d)?.0)
    }
}

fn non_finite_name(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

struct Number(f64);

impl<'de> serde::Deserialize<'de> for Number {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(x) => Ok(Number(x)),
            Raw::S(s) => parse_number(&s)
                .map(Number)
                .ok_or_else(|| serde::de::Error::custom(format!("bad number '{s}'"))),
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        "nan" | "NaN" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// Rows of numbers from CSV text. `#` lines are comments, blank lines are
/// skipped, errors carry 1-based line numbers.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize);
        // comments are skipped here rather than by the reader, whose line count would leave them out
        if rec.iter().all(|f| f.is_empty()) || rec.get(0).is_some_and(|f| f.starts_with('#')) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                parse_number(f).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("'{f}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn format_rows(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format_number(*x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Shortest representation that parses back to the same value.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        non_finite_name(x).to_string()
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    let rows = parse_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            line: None,
            msg: "frame file has no rows".into(),
        });
    }
    Frame::new(rows)
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    parse_frame(&read_text(path)?)
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    std::fs::File::create(path)?.write_all(format_rows(&frame.to_rows()).as_bytes())?;
    Ok(())
}

/// A JSON array or a single CSV column.
pub fn parse_bias(text: &str) -> Result<Bias> {
    let t = text.trim_start();
    let values = if t.starts_with('[') {
        let v: Vec<Number> = serde_json::from_str(t)?;
        v.into_iter().map(|x| x.0).collect()
    } else {
        let rows = parse_rows(text)?;
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != 1) {
            return Err(Error::Parse {
                line: None,
                msg: format!("bias row {} has {} columns, expected 1", k + 1, r.len()),
            });
        }
        rows.into_iter().map(|r| r[0]).collect()
    };
    Ok(Bias::new(values))
}

pub fn read_bias(path: &Path) -> Result<Bias> {
    parse_bias(&read_text(path)?)
}

pub fn write_bias(path: &Path, bias: &Bias) -> Result<()> {
    let rows: Vec<Vec<f64>> = bias.values().iter().map(|v| vec![*v]).collect();
    std::fs::File::create(path)?.write_all(format_rows(&rows).as_bytes())?;
    Ok(())
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_rows(&read_text(path)?)
}
