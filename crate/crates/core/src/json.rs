//! Canonical JSON for elements, Jordan maps and reports.
//!
//! Objects are written with sorted keys and no whitespace; finite floats use
//! 17 significant digits in exponent form, so that writing a parsed document
//! reproduces it byte for byte. Non-finite floats become the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::io;

use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraShape, Element};
use crate::error::{ConeError, Result};
use crate::jordan::JordanIso;
use crate::matrix::{CMat, C64};

struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` canonically. Map keys come out sorted because
/// `serde_json::Map` is ordered.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    serde::Serialize::serialize(value, &mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// JSON number for finite `x`, a marker string otherwise.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn float_from(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

fn matrix_to_json(m: &CMat) -> Value {
    let n = m.dim();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let z = m[(i, j)];
                            Value::Array(vec![float(z.re), float(z.im)])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn parse_err(msg: impl Into<String>) -> ConeError {
    ConeError::Parse(msg.into())
}

fn matrix_from_json(v: &Value, n: usize, what: &str) -> Result<CMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err(format!("{what}: expected an array of rows")))?;
    if rows.len() != n {
        return Err(parse_err(format!(
            "{what}: expected {n} rows, found {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| parse_err(format!("{what}, row {i}: expected an array")))?;
        if row.len() != n {
            return Err(parse_err(format!(
                "{what}, row {i}: expected {n} entries, found {}",
                row.len()
            )));
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                parse_err(format!("{what}, entry ({i},{j}): expected [re, im]"))
            })?;
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => data.push(C64::new(re, im)),
                _ => {
                    return Err(parse_err(format!(
                        "{what}, entry ({i},{j}): components must be finite numbers"
                    )))
                }
            }
        }
    }
    Ok(CMat::from_row_major(n, data))
}

fn shape_from_json(v: Option<&Value>) -> Result<AlgebraShape> {
    let dims = v
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"shape\" must be an array of block sizes"))?
        .iter()
        .map(|d| {
            d.as_u64()
                .filter(|&n| n >= 1)
                .map(|n| n as usize)
                .ok_or_else(|| parse_err("block sizes must be positive integers"))
        })
        .collect::<Result<Vec<_>>>()?;
    AlgebraShape::new(dims).map_err(|e| parse_err(e.to_string()))
}

pub fn element_to_json(x: &Element) -> Value {
    json!({
        "shape": x.shape().dims(),
        "blocks": x.blocks().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn element_from_json(v: &Value) -> Result<Element> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("element must be a JSON object"))?;
    expect_keys(obj, &["blocks", "shape"], "element")?;
    let shape = shape_from_json(obj.get("shape"))?;
    let blocks = obj
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"blocks\" must be an array"))?;
    if blocks.len() != shape.num_blocks() {
        return Err(parse_err(format!(
            "shape lists {} blocks but \"blocks\" has {}; block {} is {}",
            shape.num_blocks(),
            blocks.len(),
            blocks.len().min(shape.num_blocks()),
            if blocks.len() < shape.num_blocks() {
                "missing"
            } else {
                "unexpected"
            }
        )));
    }
    let mats = blocks
        .iter()
        .zip(shape.dims())
        .enumerate()
        .map(|(i, (b, &n))| matrix_from_json(b, n, &format!("block {i}")))
        .collect::<Result<Vec<_>>>()?;
    Element::new(mats).map_err(|e| parse_err(e.to_string()))
}

pub fn jordan_to_json(j: &JordanIso) -> Value {
    json!({
        "perm": j.perm(),
        "unitaries": j.unitaries().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "transpose": j.transpose_flags(),
    })
}

/// The source shape is implied: source block `i` has the size of target
/// block `perm[i]`.
pub fn jordan_from_json(v: &Value) -> Result<JordanIso> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("Jordan map must be a JSON object"))?;
    expect_keys(obj, &["perm", "transpose", "unitaries"], "Jordan map")?;
    let perm = obj
        .get("perm")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"perm\" must be an array"))?
        .iter()
        .map(|p| {
            p.as_u64()
                .map(|p| p as usize)
                .ok_or_else(|| parse_err("\"perm\" entries must be non-negative integers"))
        })
        .collect::<Result<Vec<_>>>()?;
    let transpose = obj
        .get("transpose")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"transpose\" must be an array"))?
        .iter()
        .map(|t| {
            t.as_bool()
                .ok_or_else(|| parse_err("\"transpose\" entries must be booleans"))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = obj
        .get("unitaries")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"unitaries\" must be an array"))?;
    let unitaries = raw
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let n = u.as_array().map_or(0, Vec::len);
            matrix_from_json(u, n, &format!("unitary {i}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if perm.len() != unitaries.len() || perm.iter().any(|&p| p >= unitaries.len()) {
        return Err(parse_err(format!(
            "perm {perm:?} does not index {} unitaries",
            unitaries.len()
        )));
    }
    let source = AlgebraShape::new(perm.iter().map(|&t| unitaries[t].dim()).collect())
        .map_err(|e| parse_err(e.to_string()))?;
    JordanIso::new(source, perm, unitaries, transpose).map_err(|e| parse_err(e.to_string()))
}

fn expect_keys(obj: &Map<String, Value>, keys: &[&str], what: &str) -> Result<()> {
    for k in obj.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(parse_err(format!("{what}: unknown field \"{k}\"")));
        }
    }
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(parse_err(format!("{what}: missing field \"{k}\"")));
        }
    }
    Ok(())
}

pub fn element_to_string(x: &Element) -> String {
    to_canonical_string(&element_to_json(x))
}

pub fn element_from_str(s: &str) -> Result<Element> {
    let v: Value = serde_json::from_str(s).map_err(|e| parse_err(e.to_string()))?;
    element_from_json(&v)
}

pub fn jordan_to_string(j: &JordanIso) -> String {
    to_canonical_string(&jordan_to_json(j))
}

pub fn jordan_from_str(s: &str) -> Result<JordanIso> {
    let v: Value = serde_json::from_str(s).map_err(|e| parse_err(e.to_string()))?;
    jordan_from_json(&v)
}
