//! JSON wire formats for instances and allocations.
//!
//! Rationals go out as plain integers when they fit in an `i64` and as
//! `"p/q"` strings otherwise. On input, integers, fraction strings and exact
//! decimal strings are accepted.

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::rational::{self, Rational};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// JSON value for a rational.
pub fn rational_to_json(v: &Rational) -> Value {
    if v.is_integer() {
        if let Some(i) = v.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(rational::format(v))
}

/// Parses an integer or a string holding an integer, fraction or decimal.
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(rational::int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(u.into()))
            } else {
                // Floats are read through their literal text so nothing is rounded.
                rational::parse(&n.to_string())
            }
        }
        Value::String(s) => rational::parse(s),
        other => Err(parse_err(format!(
            "expected a number or string, got {other}"
        ))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(format!("missing field \"{key}\"")))
}

fn as_count(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| parse_err(format!("\"{key}\" must be a non-negative integer")))
}

pub fn instance_from_value(v: &Value) -> Result<Instance> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("instance must be a JSON object"))?;
    let rows = field(obj, "valuations")?
        .as_array()
        .ok_or_else(|| parse_err("\"valuations\" must be an array of rows"))?;
    let values = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.as_array()
                .ok_or_else(|| parse_err(format!("row {i} is not an array")))?
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance::new(values)?;
    if let Some(n) = obj.get("agents") {
        let n = as_count(n, "agents")?;
        if n != inst.agents() {
            return Err(parse_err(format!(
                "\"agents\" is {n} but {} rows given",
                inst.agents()
            )));
        }
    }
    if let Some(m) = obj.get("items") {
        let m = as_count(m, "items")?;
        if m != inst.items() {
            return Err(parse_err(format!(
                "\"items\" is {m} but rows have {} entries",
                inst.items()
            )));
        }
    }
    Ok(inst)
}

pub fn instance_to_value(inst: &Instance) -> Value {
    json!({
        "agents": inst.agents(),
        "items": inst.items(),
        "valuations": inst
            .rows()
            .iter()
            .map(|row| row.iter().map(rational_to_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    instance_from_value(&v)
}

/// Pretty JSON with a trailing newline.
pub fn instance_to_string(inst: &Instance) -> String {
    pretty(&instance_to_value(inst))
}

pub fn allocation_to_value(alloc: &Allocation) -> Value {
    json!({
        "bundles": alloc.bundles,
        "leftover_folded_into": alloc.leftover_folded_into,
        "leftovers": alloc.leftovers,
        "stats": serde_json::to_value(&alloc.stats).expect("stats serialize"),
    })
}

pub fn allocation_to_string(alloc: &Allocation) -> String {
    pretty(&allocation_to_value(alloc))
}

/// Reads bundles and the leftover record; `stats` is output-only and ignored.
pub fn parse_allocation(text: &str) -> Result<Allocation> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("allocation must be a JSON object"))?;
    let ids = |v: &Value, what: &str| -> Result<Vec<usize>> {
        v.as_array()
            .ok_or_else(|| parse_err(format!("{what} must be an array")))?
            .iter()
            .map(|j| as_count(j, "item id"))
            .collect()
    };
    let bundles = field(obj, "bundles")?
        .as_array()
        .ok_or_else(|| parse_err("\"bundles\" must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, b)| ids(b, &format!("bundle {i}")))
        .collect::<Result<Vec<_>>>()?;
    let leftovers = match obj.get("leftovers") {
        Some(v) => ids(v, "\"leftovers\"")?,
        None => Vec::new(),
    };
    let leftover_folded_into = match obj.get("leftover_folded_into") {
        None | Some(Value::Null) => None,
        Some(v) => Some(as_count(v, "leftover_folded_into")?),
    };
    Ok(Allocation {
        bundles,
        leftovers,
        leftover_folded_into,
        ..Default::default()
    })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
