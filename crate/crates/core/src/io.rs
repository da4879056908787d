//! JSON documents for matrices, conjugations and partial operators.
//!
//! ```text
//! {"kind": "matrix", "rows": 2, "cols": 2, "entries": [[re, im], ...]}
//! {"kind": "conjugation", "rows": n, "cols": n, "entries": [...]}
//! {"kind": "partial-operator", "ambient": n,
//!  "domain_basis": {matrix}, "action": {matrix}}
//! ```
//!
//! Entries are row-major. Doubles are printed in shortest round-trip form, so
//! writing and re-reading reproduces every bit. `kind` may be omitted for
//! matrices and conjugations.

use serde_json::{json, Map, Value};

use crate::conjugation::Conjugation;
use crate::error::{Error, Result};
use crate::extension::PartialSymmetricOperator;
use crate::numkernel::{CMatrix, C64};

fn parse_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{field}`: {msg}"))
}

fn matrix_value(m: &CMatrix, kind: &str) -> Value {
    let entries: Vec<Value> = m.as_slice().iter().map(|z| json!([z.re, z.im])).collect();
    json!({
        "kind": kind,
        "rows": m.rows(),
        "cols": m.cols(),
        "entries": entries,
    })
}

/// The matrix document as a JSON value, for embedding in reports.
pub fn matrix_to_value(m: &CMatrix) -> Value {
    matrix_value(m, "matrix")
}

fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn matrix_to_string(m: &CMatrix) -> String {
    to_text(&matrix_value(m, "matrix"))
}

pub fn conjugation_to_string(j: &Conjugation) -> String {
    to_text(&matrix_value(j.coeff(), "conjugation"))
}

pub fn partial_operator_to_string(t: &PartialSymmetricOperator) -> String {
    to_text(&json!({
        "kind": "partial-operator",
        "ambient": t.ambient(),
        "domain_basis": matrix_value(t.domain_basis(), "matrix"),
        "action": matrix_value(t.action(), "matrix"),
    }))
}

fn parse_document(text: &str) -> Result<Map<String, Value>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Parse("document must be a JSON object".into())),
    }
}

fn check_kind(
    map: &Map<String, Value>,
    prefix: &str,
    accepted: &[&str],
    required: bool,
) -> Result<()> {
    let field = format!("{prefix}kind");
    match map.get("kind") {
        None if !required => Ok(()),
        None => Err(parse_err(&field, "missing")),
        Some(Value::String(k)) if accepted.contains(&k.as_str()) => Ok(()),
        Some(other) => Err(parse_err(
            &field,
            format!("expected one of {accepted:?}, got {other}"),
        )),
    }
}

fn get_count(map: &Map<String, Value>, prefix: &str, name: &str) -> Result<usize> {
    let field = format!("{prefix}{name}");
    let v = map.get(name).ok_or_else(|| parse_err(&field, "missing"))?;
    let n = v
        .as_u64()
        .ok_or_else(|| parse_err(&field, format!("expected a non-negative integer, got {v}")))?;
    usize::try_from(n).map_err(|_| parse_err(&field, "too large"))
}

fn get_number(v: &Value, field: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| parse_err(field, format!("expected a number, got {v}")))?;
    if !x.is_finite() {
        return Err(parse_err(field, "non-finite value"));
    }
    Ok(x)
}

fn matrix_from_map(map: &Map<String, Value>, prefix: &str) -> Result<CMatrix> {
    let rows = get_count(map, prefix, "rows")?;
    let cols = get_count(map, prefix, "cols")?;
    let field = format!("{prefix}entries");
    let entries = map
        .get("entries")
        .ok_or_else(|| parse_err(&field, "missing"))?
        .as_array()
        .ok_or_else(|| parse_err(&field, "expected an array of [re, im] pairs"))?;
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err(&field, "rows * cols overflows"))?;
    if entries.len() != expected {
        return Err(parse_err(
            &field,
            format!(
                "expected {expected} entries for a {rows}x{cols} matrix, got {}",
                entries.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(expected);
    for (idx, e) in entries.iter().enumerate() {
        let f = format!("{field}[{idx}]");
        let pair = e
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| parse_err(&f, format!("expected a [re, im] pair, got {e}")))?;
        data.push(C64::new(
            get_number(&pair[0], &f)?,
            get_number(&pair[1], &f)?,
        ));
    }
    if rows == 0 || cols == 0 {
        return Err(parse_err(
            &format!("{prefix}rows"),
            "matrix must be non-empty",
        ));
    }
    CMatrix::from_vec(rows, cols, data).map_err(|e| parse_err(&field, e))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let map = parse_document(text)?;
    check_kind(&map, "", &["matrix"], false)?;
    matrix_from_map(&map, "")
}

/// Also checks the conjugation axioms.
pub fn parse_conjugation(text: &str) -> Result<Conjugation> {
    let map = parse_document(text)?;
    check_kind(&map, "", &["conjugation", "matrix"], false)?;
    let coeff = matrix_from_map(&map, "")?;
    let j = Conjugation::new(coeff).map_err(|e| parse_err("rows", e))?;
    let report = j.verify();
    if !report.passed {
        return Err(parse_err(
            "entries",
            format!(
                "not a conjugation (involution residual {:.3e}, antiunitarity residual {:.3e})",
                report.involution, report.antiunitarity
            ),
        ));
    }
    Ok(j)
}

pub fn parse_partial_operator(text: &str) -> Result<PartialSymmetricOperator> {
    let map = parse_document(text)?;
    check_kind(&map, "", &["partial-operator"], true)?;
    let ambient = get_count(&map, "", "ambient")?;
    let sub = |name: &str| -> Result<CMatrix> {
        let prefix = format!("{name}.");
        let inner = map
            .get(name)
            .ok_or_else(|| parse_err(name, "missing"))?
            .as_object()
            .ok_or_else(|| parse_err(name, "expected a matrix object"))?;
        check_kind(inner, &prefix, &["matrix"], false)?;
        matrix_from_map(inner, &prefix)
    };
    let domain_basis = sub("domain_basis")?;
    let action = sub("action")?;
    if domain_basis.rows() != ambient {
        return Err(parse_err(
            "domain_basis.rows",
            format!(
                "expected {ambient} (the ambient dimension), got {}",
                domain_basis.rows()
            ),
        ));
    }
    if action.rows() != ambient {
        return Err(parse_err(
            "action.rows",
            format!(
                "expected {ambient} (the ambient dimension), got {}",
                action.rows()
            ),
        ));
    }
    PartialSymmetricOperator::new(domain_basis, action).map_err(|e| parse_err("domain_basis", e))
}
