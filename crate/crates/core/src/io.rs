//! JSON reading and writing for measures, kernels and functions.
//!
//! Parsing goes through [`serde_json::Value`] so that every rejection can
//! name the offending field, e.g. `atoms[2].w: weight must be nonnegative`.
//! Unknown fields are rejected. Output is compact JSON with every float
//! written in scientific notation with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{ser::Formatter, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{PolyhedralSupportFunction, SphericalFunctionSamples};
use crate::kernels::DiscreteKernel;
use crate::measures::{Atom, DiscreteMeasure, Point};
use crate::order::{AffinePiece, ConvexPolyhedralFunction};

/// Compact formatter writing floats as `{:.16e}`.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serialize to compact JSON with 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("serializing in-memory values cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{path}: {msg}"))
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!("line {} column {}: {e}", e.line(), e.column()))
    })
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let map = v.as_object().ok_or_else(|| bad(path, "expected an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(bad(path, format!("unknown field `{k}`")));
    }
    Ok(map)
}

fn field<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<(&'a Value, String)> {
    let sub = if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    };
    let v = map
        .get(key)
        .ok_or_else(|| bad(if path.is_empty() { "<root>" } else { path }, format!("missing field `{key}`")))?;
    Ok((v, sub))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a [Value]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| bad(path, "expected an array"))
}

fn real(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| bad(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(bad(path, "number is not finite"));
    }
    Ok(x)
}

fn dimension(v: &Value, path: &str) -> Result<usize> {
    let d = v
        .as_u64()
        .ok_or_else(|| bad(path, "expected a positive integer"))?;
    if d == 0 {
        return Err(bad(path, "dimension must be at least 1"));
    }
    usize::try_from(d).map_err(|_| bad(path, "dimension too large"))
}

fn vector(v: &Value, path: &str, dim: usize) -> Result<Point> {
    let items = array(v, path)?;
    if items.len() != dim {
        return Err(bad(path, format!("expected {dim} coordinates, found {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(c, x)| real(x, &format!("{path}[{c}]")))
        .collect::<Result<Vec<_>>>()
        .map(Point)
}

fn vectors(v: &Value, path: &str, dim: usize) -> Result<Vec<Point>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| vector(x, &format!("{path}[{i}]"), dim))
        .collect()
}

fn nonneg(v: &Value, path: &str) -> Result<f64> {
    let w = real(v, path)?;
    if w < 0.0 {
        return Err(bad(path, format!("must be nonnegative, got {w}")));
    }
    Ok(w)
}

/// `{"dim": d, "atoms": [{"x": [..], "w": real ≥ 0}, ..]}`
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let root = parse_value(text)?;
    let map = object(&root, "<root>", &["dim", "atoms"])?;
    let (d, dp) = field(map, "dim", "")?;
    let dim = dimension(d, &dp)?;
    let (atoms, ap) = field(map, "atoms", "")?;
    let atoms = array(atoms, &ap)?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = format!("atoms[{i}]");
            let m = object(a, &p, &["x", "w"])?;
            let (x, xp) = field(m, "x", &p)?;
            let (w, wp) = field(m, "w", &p)?;
            Ok(Atom {
                x: vector(x, &xp, dim)?,
                w: nonneg(w, &wp)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::new(dim, atoms)
}

/// `{"dim": d, "source": [[..]..], "targets": [[..]..], "Q": [[..]..]}`
pub fn parse_kernel(text: &str) -> Result<DiscreteKernel> {
    let root = parse_value(text)?;
    let map = object(&root, "<root>", &["dim", "source", "targets", "Q"])?;
    let (d, dp) = field(map, "dim", "")?;
    let dim = dimension(d, &dp)?;
    let (s, sp) = field(map, "source", "")?;
    let source = vectors(s, &sp, dim)?;
    let (t, tp) = field(map, "targets", "")?;
    let targets = vectors(t, &tp, dim)?;
    let (q, qp) = field(map, "Q", "")?;
    let rows = array(q, &qp)?;
    if rows.len() != source.len() {
        return Err(bad(
            &qp,
            format!("expected {} rows, found {}", source.len(), rows.len()),
        ));
    }
    let q = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = format!("Q[{i}]");
            let row = array(row, &rp)?;
            if row.len() != targets.len() {
                return Err(bad(
                    &rp,
                    format!("expected {} entries, found {}", targets.len(), row.len()),
                ));
            }
            row.iter()
                .enumerate()
                .map(|(j, v)| nonneg(v, &format!("Q[{i}][{j}]")))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    DiscreteKernel::new(dim, source, targets, q)
}

/// `{"dim": d, "gradients": [[..], ..]}`
pub fn parse_support_function(text: &str) -> Result<PolyhedralSupportFunction> {
    let root = parse_value(text)?;
    let map = object(&root, "<root>", &["dim", "gradients"])?;
    let (d, dp) = field(map, "dim", "")?;
    let dim = dimension(d, &dp)?;
    let (g, gp) = field(map, "gradients", "")?;
    let gradients = vectors(g, &gp, dim)?;
    if gradients.is_empty() {
        return Err(bad(&gp, "at least one gradient is required"));
    }
    PolyhedralSupportFunction::new(dim, gradients)
}

/// `{"dim": d, "pieces": [{"b": [..], "a": real}, ..]}`
pub fn parse_convex_function(text: &str) -> Result<ConvexPolyhedralFunction> {
    let root = parse_value(text)?;
    let map = object(&root, "<root>", &["dim", "pieces"])?;
    let (d, dp) = field(map, "dim", "")?;
    let dim = dimension(d, &dp)?;
    let (ps, pp) = field(map, "pieces", "")?;
    let pieces = array(ps, &pp)?
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = format!("pieces[{k}]");
            let m = object(v, &p, &["b", "a"])?;
            let (b, bp) = field(m, "b", &p)?;
            let (a, ap) = field(m, "a", &p)?;
            Ok(AffinePiece {
                b: vector(b, &bp, dim)?,
                a: real(a, &ap)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if pieces.is_empty() {
        return Err(bad(&pp, "at least one piece is required"));
    }
    ConvexPolyhedralFunction::new(dim, pieces)
}

/// `{"dim": d, "samples": [{"u": [..unit..], "f": real}, ..]}`
pub fn parse_spherical_samples(text: &str) -> Result<SphericalFunctionSamples> {
    let root = parse_value(text)?;
    let map = object(&root, "<root>", &["dim", "samples"])?;
    let (d, dp) = field(map, "dim", "")?;
    let dim = dimension(d, &dp)?;
    let (s, sp) = field(map, "samples", "")?;
    let samples = array(s, &sp)?
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = format!("samples[{k}]");
            let m = object(v, &p, &["u", "f"])?;
            let (u, up) = field(m, "u", &p)?;
            let (f, fp) = field(m, "f", &p)?;
            let u = vector(u, &up, dim)?;
            if (u.norm() - 1.0).abs() > 1e-9 {
                return Err(bad(&up, format!("expected a unit vector, norm is {}", u.norm())));
            }
            Ok((u, real(f, &fp)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SphericalFunctionSamples::new(dim, samples)
}
