//! JSON instance and result documents.
//!
//! Integers are written as JSON numbers when they fit in 64 bits and as
//! decimal strings otherwise; both spellings are accepted on input.
//! Rationals are written as `"p/q"` strings, or as integers when whole.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::gen::{Form, OracleBox};
use crate::instance::{InequalityIp, MixedIp, ProblemInstance, Solution, StandardIp};
use crate::matrix::IntMatrix;

/// A parsed instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDocument {
    pub instance: ProblemInstance,
    pub delta: Option<BigInt>,
    pub oracle_box: Option<OracleBox>,
}

impl InstanceDocument {
    pub fn form(&self) -> Form {
        match self.instance {
            ProblemInstance::Standard(_) => Form::Standard,
            ProblemInstance::Inequality(_) => Form::Inequality,
            ProblemInstance::Mixed(_) => Form::Mixed,
        }
    }
}

pub fn int_to_json(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

pub fn ints_to_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_to_json).collect())
}

pub fn matrix_to_json(m: &IntMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| ints_to_json(m.row(i))).collect())
}

pub fn rational_to_json(v: &BigRational) -> Value {
    if v.is_integer() {
        int_to_json(&v.to_integer())
    } else {
        json!(v.to_string())
    }
}

pub fn instance_to_json(doc: &InstanceDocument) -> Value {
    let mut o = Map::new();
    let form = serde_json::to_value(doc.form()).expect("form serializes");
    o.insert("form".into(), form);
    match &doc.instance {
        ProblemInstance::Standard(StandardIp { a, b, c })
        | ProblemInstance::Inequality(InequalityIp { a, b, c }) => {
            o.insert("A".into(), matrix_to_json(a));
            o.insert("b".into(), ints_to_json(b));
            o.insert("c".into(), ints_to_json(c));
        }
        ProblemInstance::Mixed(mip) => {
            o.insert("A".into(), matrix_to_json(&mip.a));
            o.insert("B".into(), matrix_to_json(&mip.b_mat));
            o.insert("b".into(), ints_to_json(&mip.b));
            o.insert("c".into(), ints_to_json(&mip.c));
            o.insert("d".into(), ints_to_json(&mip.d));
        }
    }
    if let Some(d) = &doc.delta {
        o.insert("delta".into(), int_to_json(d));
    }
    match &doc.oracle_box {
        Some(OracleBox::Nonneg(r)) => {
            o.insert("box".into(), int_to_json(r));
        }
        Some(OracleBox::Signed(ranges)) => {
            let v = ranges
                .iter()
                .map(|(lo, hi)| json!([int_to_json(lo), int_to_json(hi)]))
                .collect();
            o.insert("box".into(), Value::Array(v));
        }
        None => {}
    }
    Value::Object(o)
}

fn bad(path: &str, what: &str) -> Error {
    Error::Parse(format!("{path}: {what}"))
}

fn parse_int(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(x) => Ok(BigInt::from(x)),
            None => n
                .as_u64()
                .map(BigInt::from)
                .ok_or_else(|| bad(path, "expected an integer")),
        },
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| bad(path, &format!("{s:?} is not a decimal integer"))),
        _ => Err(bad(path, "expected an integer")),
    }
}

fn parse_vec(v: &Value, path: &str) -> Result<Vec<BigInt>> {
    let arr = v.as_array().ok_or_else(|| bad(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| parse_int(x, &format!("{path}[{i}]")))
        .collect()
}

/// Parses a matrix given as an array of rows; `path` prefixes error locations.
pub fn parse_matrix(v: &Value, path: &str, rows_hint: usize) -> Result<IntMatrix> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(path, "expected an array of rows"))?;
    let rows = arr
        .iter()
        .enumerate()
        .map(|(i, r)| parse_vec(r, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() || rows.iter().all(|r| r.is_empty()) {
        // a matrix without columns, e.g. B when there are no continuous variables
        return Ok(IntMatrix::zeros(rows.len().max(rows_hint), 0));
    }
    IntMatrix::try_from_rows(rows).map_err(|e| bad(path, &e.to_string()))
}

fn field<'a>(o: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| bad(key, "missing field"))
}

/// Parses an instance document; errors name the offending location.
pub fn parse_instance(text: &str) -> Result<InstanceDocument> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let o = v
        .as_object()
        .ok_or_else(|| bad("$", "expected a JSON object"))?;
    let form: Form = serde_json::from_value(field(o, "form")?.clone())
        .map_err(|_| bad("form", "expected \"standard\", \"inequality\" or \"mixed\""))?;
    let a = parse_matrix(field(o, "A")?, "A", 0)?;
    let b = parse_vec(field(o, "b")?, "b")?;
    let c = parse_vec(field(o, "c")?, "c")?;
    let shape = |e: Error| bad("$", &e.to_string());
    let instance = match form {
        Form::Standard => ProblemInstance::Standard(StandardIp::new(a, b, c).map_err(shape)?),
        Form::Inequality => ProblemInstance::Inequality(InequalityIp::new(a, b, c).map_err(shape)?),
        Form::Mixed => {
            let b_mat = parse_matrix(field(o, "B")?, "B", a.rows())?;
            let d = parse_vec(field(o, "d")?, "d")?;
            ProblemInstance::Mixed(MixedIp::new(a, b_mat, b, c, d).map_err(shape)?)
        }
    };
    if form != Form::Mixed && (o.contains_key("B") || o.contains_key("d")) {
        return Err(bad("B", "only mixed instances have B and d"));
    }
    let delta = o.get("delta").map(|v| parse_int(v, "delta")).transpose()?;
    let oracle_box = match o.get("box") {
        None => None,
        Some(Value::Array(ranges)) => Some(OracleBox::Signed(
            ranges
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let p = parse_vec(r, &format!("box[{i}]"))?;
                    match p.as_slice() {
                        [lo, hi] => Ok((lo.clone(), hi.clone())),
                        _ => Err(bad(&format!("box[{i}]"), "expected [lo, hi]")),
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        )),
        Some(v) => Some(OracleBox::Nonneg(parse_int(v, "box")?)),
    };
    Ok(InstanceDocument {
        instance,
        delta,
        oracle_box,
    })
}

/// The solution part of a result document.
pub fn solution_to_json(sol: &Solution) -> Value {
    let mut o = Map::new();
    o.insert(
        "status".into(),
        serde_json::to_value(sol.status).expect("status serializes"),
    );
    o.insert(
        "x".into(),
        sol.x.as_deref().map_or(Value::Null, ints_to_json),
    );
    if let Some(y) = &sol.y {
        o.insert(
            "y".into(),
            Value::Array(y.iter().map(rational_to_json).collect()),
        );
    }
    o.insert(
        "objective".into(),
        sol.objective.as_ref().map_or(Value::Null, rational_to_json),
    );
    o.insert(
        "certificate".into(),
        sol.certificate.as_deref().map_or(Value::Null, ints_to_json),
    );
    o.insert("boxed".into(), json!(sol.boxed));
    Value::Object(o)
}
