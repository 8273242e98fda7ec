//! Text serialization of matrices, operator systems, effect bases and channels.
//!
//! Documents are JSON objects with sorted keys. Every document carries `"kind"`
//! and `"version"`; complex matrices are stored as a pair of row-major nested arrays
//! `"re"` and `"im"`. Decimals use the shortest representation that parses back to
//! the same `f64`, so emit/parse round trips are exact. See `docs/format.md`.

use serde_json::{json, Map, Value};

use crate::channels::{QuantumChannel, TP_LOAD_TOL};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::opsys::{EffectBasis, EffectKind, EffectTolerance, OperatorSystem};

pub const FORMAT_VERSION: &str = "1";
/// Tolerance for operator-system invariants on load.
pub const SYSTEM_LOAD_TOL: f64 = 1e-6;

/// Any object the format can carry.
#[derive(Clone, Debug)]
pub enum Document {
    Matrix(ComplexMatrix),
    OperatorSystem(OperatorSystem),
    EffectBasis(EffectBasis),
    Channel(QuantumChannel),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Matrix(_) => "matrix",
            Document::OperatorSystem(_) => "operator_system",
            Document::EffectBasis(_) => "effect_basis",
            Document::Channel(_) => "channel",
        }
    }
}

impl From<ComplexMatrix> for Document {
    fn from(m: ComplexMatrix) -> Self {
        Document::Matrix(m)
    }
}

impl From<OperatorSystem> for Document {
    fn from(s: OperatorSystem) -> Self {
        Document::OperatorSystem(s)
    }
}

impl From<EffectBasis> for Document {
    fn from(e: EffectBasis) -> Self {
        Document::EffectBasis(e)
    }
}

impl From<QuantumChannel> for Document {
    fn from(c: QuantumChannel) -> Self {
        Document::Channel(c)
    }
}

fn entries(m: &ComplexMatrix) -> (Value, Value) {
    let part = |f: fn(&crate::numerics::C64) -> f64| {
        Value::Array(
            (0..m.rows())
                .map(|i| Value::Array(m.row(i).iter().map(|z| json!(f(z))).collect()))
                .collect(),
        )
    };
    (part(|z| z.re), part(|z| z.im))
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    let (re, im) = entries(m);
    json!({ "im": im, "re": re })
}

fn matrix_list(ms: &[ComplexMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_value).collect())
}

/// Canonical text of a document. Deterministic: equal inputs give equal bytes.
pub fn emit(doc: &Document) -> String {
    let mut value = match doc {
        Document::Matrix(m) => {
            let (re, im) = entries(m);
            json!({ "cols": m.cols(), "im": im, "re": re, "rows": m.rows() })
        }
        Document::OperatorSystem(s) => json!({
            "basis": matrix_list(s.basis()),
            "dim_h": s.dim_h(),
            "dim_s": s.dim(),
        }),
        Document::EffectBasis(e) => json!({
            "construction": e.kind().to_string(),
            "dim_h": e.dim_h(),
            "effects": matrix_list(e.effects()),
        }),
        Document::Channel(c) => json!({
            "dim_in": c.dim_in(),
            "dim_out": c.dim_out(),
            "kraus": matrix_list(c.kraus()),
        }),
    };
    let obj = value.as_object_mut().expect("documents are objects");
    obj.insert("kind".into(), json!(doc.kind()));
    obj.insert("version".into(), json!(FORMAT_VERSION));
    let mut text = serde_json::to_string_pretty(&value).expect("serializing a JSON value");
    text.push('\n');
    text
}

fn parse_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(join(ctx, key), "missing field"))
}

fn join(ctx: &str, key: &str) -> String {
    if ctx.is_empty() {
        key.to_string()
    } else {
        format!("{ctx}.{key}")
    }
}

fn as_count(v: &Value, ctx: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .filter(|&x| x > 0)
        .ok_or_else(|| parse_err(ctx, format!("expected a positive integer, found {v}")))
}

fn as_object<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(ctx, "expected an object"))
}

fn as_array<'a>(v: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| parse_err(ctx, "expected an array"))
}

/// Reads a `rows x cols` real array; `None` for the shape means "take it from the data".
fn real_rows(
    v: &Value,
    ctx: &str,
    shape: Option<(usize, usize)>,
) -> Result<(usize, usize, Vec<f64>)> {
    let rows = as_array(v, ctx)?;
    if rows.is_empty() {
        return Err(parse_err(ctx, "matrix has no rows"));
    }
    let cols = as_array(&rows[0], &format!("{ctx}[0]"))?.len();
    let (want_rows, want_cols) = shape.unwrap_or((rows.len(), cols));
    if rows.len() != want_rows {
        return Err(parse_err(
            ctx,
            format!("expected {want_rows} rows, found {}", rows.len()),
        ));
    }
    let mut out = Vec::with_capacity(want_rows * want_cols);
    for (i, row) in rows.iter().enumerate() {
        let rctx = format!("{ctx}[{i}]");
        let row = as_array(row, &rctx)?;
        if row.len() != want_cols {
            return Err(parse_err(
                &rctx,
                format!("expected {want_cols} columns, found {}", row.len()),
            ));
        }
        for (j, x) in row.iter().enumerate() {
            let x = x.as_f64().ok_or_else(|| {
                parse_err(
                    format!("{rctx}[{j}]"),
                    format!("expected a number, found {x}"),
                )
            })?;
            out.push(x);
        }
    }
    Ok((want_rows, want_cols, out))
}

fn parse_matrix(v: &Value, ctx: &str, shape: Option<(usize, usize)>) -> Result<ComplexMatrix> {
    let obj = as_object(v, ctx)?;
    let re_ctx = join(ctx, "re");
    let (rows, cols, re) = real_rows(field(obj, "re", ctx)?, &re_ctx, shape)?;
    let (_, _, im) = real_rows(field(obj, "im", ctx)?, &join(ctx, "im"), Some((rows, cols)))?;
    ComplexMatrix::from_parts(rows, cols, &re, &im).map_err(|e| parse_err(ctx, e.to_string()))
}

fn parse_matrix_list(
    obj: &Map<String, Value>,
    key: &str,
    shape: (usize, usize),
) -> Result<Vec<ComplexMatrix>> {
    as_array(field(obj, key, "")?, key)?
        .iter()
        .enumerate()
        .map(|(k, v)| parse_matrix(v, &format!("{key}[{k}]"), Some(shape)))
        .collect()
}

/// Parses and validates a document.
///
/// Syntax errors report line and column; structural problems name the offending
/// field; violated invariants come back as [`Error::Validation`].
pub fn parse(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let obj = as_object(&value, "document")?;
    let version = field(obj, "version", "")?;
    if version.as_str() != Some(FORMAT_VERSION) {
        return Err(parse_err(
            "version",
            format!("unsupported format version {version}"),
        ));
    }
    let kind = field(obj, "kind", "")?
        .as_str()
        .ok_or_else(|| parse_err("kind", "expected a string"))?;
    match kind {
        "matrix" => {
            let rows = as_count(field(obj, "rows", "")?, "rows")?;
            let cols = as_count(field(obj, "cols", "")?, "cols")?;
            let m = parse_matrix(&value, "", Some((rows, cols)))?;
            Ok(Document::Matrix(m))
        }
        "operator_system" => {
            let n = as_count(field(obj, "dim_h", "")?, "dim_h")?;
            let d = as_count(field(obj, "dim_s", "")?, "dim_s")?;
            let basis = parse_matrix_list(obj, "basis", (n, n))?;
            if basis.len() != d {
                return Err(parse_err(
                    "basis",
                    format!("dim_s is {d} but {} basis elements given", basis.len()),
                ));
            }
            Ok(Document::OperatorSystem(
                OperatorSystem::from_hermitian_basis(n, basis, SYSTEM_LOAD_TOL)?,
            ))
        }
        "effect_basis" => {
            let n = as_count(field(obj, "dim_h", "")?, "dim_h")?;
            let construction: EffectKind = field(obj, "construction", "")?
                .as_str()
                .ok_or_else(|| parse_err("construction", "expected a string"))?
                .parse()
                .map_err(|e: Error| parse_err("construction", e.to_string()))?;
            let effects = parse_matrix_list(obj, "effects", (n, n))?;
            Ok(Document::EffectBasis(EffectBasis::with_tolerance(
                construction,
                effects,
                EffectTolerance::LOAD,
            )?))
        }
        "channel" => {
            let n = as_count(field(obj, "dim_in", "")?, "dim_in")?;
            let m = as_count(field(obj, "dim_out", "")?, "dim_out")?;
            let kraus = parse_matrix_list(obj, "kraus", (m, n))?;
            Ok(Document::Channel(QuantumChannel::with_tp_tolerance(
                n,
                m,
                kraus,
                TP_LOAD_TOL,
            )?))
        }
        other => Err(parse_err(
            "kind",
            format!("unknown document kind {other:?}"),
        )),
    }
}
