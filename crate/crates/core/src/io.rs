//! Plain-text tensor format.
//!
//! ```text
//! shape: 2 2 2 2 field: complex
//! 1 0
//! 0 0
//! ...
//! ```
//!
//! The header is followed by one scalar per line in storage order
//! (first index fastest); complex scalars are written as `re im`. Blank lines
//! and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::{c64, Error, Field, Result, Scalar, Tensor};

/// A tensor whose field is only known at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    Real(Tensor<f64>),
    Complex(Tensor<c64>),
}

impl AnyTensor {
    pub fn field(&self) -> Field {
        match self {
            AnyTensor::Real(_) => Field::Real,
            AnyTensor::Complex(_) => Field::Complex,
        }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            AnyTensor::Real(t) => t.shape(),
            AnyTensor::Complex(t) => t.shape(),
        }
    }

    /// Complex view; real tensors are promoted.
    pub fn to_complex(&self) -> Tensor<c64> {
        match self {
            AnyTensor::Real(t) => t.to_complex(),
            AnyTensor::Complex(t) => t.clone(),
        }
    }
}

impl From<Tensor<f64>> for AnyTensor {
    fn from(t: Tensor<f64>) -> Self {
        AnyTensor::Real(t)
    }
}

impl From<Tensor<c64>> for AnyTensor {
    fn from(t: Tensor<c64>) -> Self {
        AnyTensor::Complex(t)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(Vec<usize>, Field)> {
    let rest = line
        .trim()
        .strip_prefix("shape:")
        .ok_or_else(|| parse_err(line_no, "header must start with `shape:`"))?;
    let (dims, field) = rest
        .split_once("field:")
        .ok_or_else(|| parse_err(line_no, "header is missing `field:`"))?;
    let shape = dims
        .split_whitespace()
        .map(|d| {
            d.parse::<usize>()
                .map_err(|e| parse_err(line_no, format!("bad extent `{d}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let field = field.parse::<Field>().map_err(|e| parse_err(line_no, e))?;
    Ok((shape, field))
}

pub fn parse_tensor(text: &str) -> Result<AnyTensor> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (shape, field) = parse_header(hline, header)?;
    let want = match field {
        Field::Real => 1,
        Field::Complex => 2,
    };
    let mut values = Vec::new();
    for (no, line) in lines {
        let parts = line
            .split_whitespace()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|e| parse_err(no, format!("bad number `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if parts.len() != want {
            return Err(parse_err(
                no,
                format!("expected {want} number(s) per line, found {}", parts.len()),
            ));
        }
        values.push(c64::new(parts[0], parts.get(1).copied().unwrap_or(0.0)));
    }
    let t = Tensor::new(shape, values).map_err(|e| parse_err(hline, e.to_string()))?;
    Ok(match field {
        Field::Real => AnyTensor::Real(Tensor::from_complex(&t)),
        Field::Complex => AnyTensor::Complex(t),
    })
}

pub fn format_tensor<S: Scalar>(t: &Tensor<S>) -> String {
    let mut out = String::from("shape:");
    for d in t.shape() {
        let _ = write!(out, " {d}");
    }
    let _ = writeln!(out, " field: {}", S::FIELD);
    for z in t.data() {
        let z = z.to_c64();
        // `{:?}` on f64 prints the shortest representation that round-trips.
        match S::FIELD {
            Field::Real => {
                let _ = writeln!(out, "{:?}", z.re);
            }
            Field::Complex => {
                let _ = writeln!(out, "{:?} {:?}", z.re, z.im);
            }
        }
    }
    out
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<AnyTensor> {
    parse_tensor(&std::fs::read_to_string(path)?)
}

pub fn write_tensor<S: Scalar>(path: impl AsRef<Path>, t: &Tensor<S>) -> Result<()> {
    std::fs::write(path, format_tensor(t))?;
    Ok(())
}
