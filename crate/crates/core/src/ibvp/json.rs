//! JSON problem documents.
//!
//! ```json
//! { "n": 2, "a": 1, "A": [[0,0,1,0],[0,0,0,1]], "T": 1,
//!   "q0": {"kind": "trig", "terms": [{"freq": 3.141592653589793, "sin": 1}]},
//!   "h": [{"kind": "poly", "coeffs": []}, {"kind": "poly", "coeffs": []}] }
//! ```
//!
//! Complex numbers are a bare number, `{"re": .., "im": ..}`, or one of the
//! strings `"i"` and `"-i"`.

use serde_json::Value;

use super::{ExpTerm, FunctionSpec, ProblemSpec, TrigTerm};
use crate::C64;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{path}: {message}")]
pub struct ParseError {
    pub path: String,
    pub message: String,
}

fn fail<T>(path: &str, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        path: path.to_string(),
        message: message.into(),
    })
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let doc: Value = serde_json::from_str(text).or_else(|e| fail("$", e.to_string()))?;
    let obj = doc
        .as_object()
        .map_or_else(|| fail("$", "expected an object"), Ok)?;
    let field = |name: &str| {
        obj.get(name)
            .map_or_else(|| fail(&format!("$.{name}"), "missing"), Ok)
    };

    let n = field("n")?
        .as_u64()
        .map_or_else(|| fail("$.n", "expected a non-negative integer"), Ok)? as usize;
    let direction = complex(field("a")?, "$.a")?;
    let final_time = real(field("T")?, "$.T")?;

    let rows = array(field("A")?, "$.A")?;
    if rows.len() != n {
        return fail("$.A", format!("expected {n} rows, got {}", rows.len()));
    }
    let mut boundary = Vec::with_capacity(n);
    for (k, row) in rows.iter().enumerate() {
        let path = format!("$.A[{k}]");
        let row = array(row, &path)?;
        if row.len() != 2 * n {
            return fail(
                &path,
                format!("expected {} entries, got {}", 2 * n, row.len()),
            );
        }
        let vals = row
            .iter()
            .enumerate()
            .map(|(c, v)| real(v, &format!("{path}[{c}]")))
            .collect::<Result<Vec<_>, _>>()?;
        boundary.push(vals);
    }

    let initial = function(field("q0")?, "$.q0")?;
    let hs = array(field("h")?, "$.h")?;
    if hs.len() != n {
        return fail(
            "$.h",
            format!("expected {n} boundary data, got {}", hs.len()),
        );
    }
    let data = hs
        .iter()
        .enumerate()
        .map(|(k, v)| function(v, &format!("$.h[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ProblemSpec {
        order: n,
        direction,
        boundary,
        final_time,
        initial,
        data,
    })
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array()
        .map_or_else(|| fail(path, "expected an array"), Ok)
}

fn real(v: &Value, path: &str) -> Result<f64, ParseError> {
    v.as_f64()
        .map_or_else(|| fail(path, "expected a number"), Ok)
}

fn complex(v: &Value, path: &str) -> Result<C64, ParseError> {
    match v {
        Value::Number(x) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::String(s) if s == "i" => Ok(C64::i()),
        Value::String(s) if s == "-i" => Ok(-C64::i()),
        Value::Object(o) => {
            let part = |key: &str| match o.get(key) {
                None => Ok(0.0),
                Some(p) => real(p, &format!("{path}.{key}")),
            };
            Ok(C64::new(part("re")?, part("im")?))
        }
        _ => fail(path, "expected a complex number"),
    }
}

fn complex_list(v: &Value, path: &str) -> Result<Vec<C64>, ParseError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, c)| complex(c, &format!("{path}[{k}]")))
        .collect()
}

fn function(v: &Value, path: &str) -> Result<FunctionSpec, ParseError> {
    let kind = v.get("kind").and_then(Value::as_str).map_or_else(
        || fail(&format!("{path}.kind"), "missing or not a string"),
        Ok,
    )?;
    let get = |key: &str| {
        v.get(key)
            .map_or_else(|| fail(&format!("{path}.{key}"), "missing"), Ok)
    };
    let zero = Value::from(0.0);
    match kind {
        "poly" => Ok(FunctionSpec::Poly(complex_list(
            get("coeffs")?,
            &format!("{path}.coeffs"),
        )?)),
        "trig" => {
            let tp = format!("{path}.terms");
            let terms = array(get("terms")?, &tp)?
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let p = format!("{tp}[{k}]");
                    Ok(TrigTerm {
                        freq: real(t.get("freq").unwrap_or(&zero), &format!("{p}.freq"))?,
                        cos: complex(t.get("cos").unwrap_or(&zero), &format!("{p}.cos"))?,
                        sin: complex(t.get("sin").unwrap_or(&zero), &format!("{p}.sin"))?,
                    })
                })
                .collect::<Result<_, ParseError>>()?;
            Ok(FunctionSpec::Trig(terms))
        }
        "exp" => {
            let tp = format!("{path}.terms");
            let terms = array(get("terms")?, &tp)?
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let p = format!("{tp}[{k}]");
                    Ok(ExpTerm {
                        coef: complex(t.get("coef").unwrap_or(&zero), &format!("{p}.coef"))?,
                        rate: complex(t.get("rate").unwrap_or(&zero), &format!("{p}.rate"))?,
                    })
                })
                .collect::<Result<_, ParseError>>()?;
            Ok(FunctionSpec::Exp(terms))
        }
        "samples" => {
            let gp = format!("{path}.grid");
            let grid = array(get("grid")?, &gp)?
                .iter()
                .enumerate()
                .map(|(k, g)| real(g, &format!("{gp}[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let values = complex_list(get("values")?, &format!("{path}.values"))?;
            FunctionSpec::samples(grid, values).or_else(|e| fail(path, e.to_string()))
        }
        other => fail(&format!("{path}.kind"), format!("unknown kind {other:?}")),
    }
}
