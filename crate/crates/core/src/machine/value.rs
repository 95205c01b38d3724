use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value as Json};

use crate::syntax::{quote_str, render_float, Const, Location};

use super::state::EnvId;

/// A function value: where its body starts, its formals, and the
/// environment it was defined in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    /// First line of the body.
    pub entry: Location,
    pub params: Vec<String>,
    pub def_env: EnvId,
    /// The `def` header line.
    pub def_loc: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(BigInt),
    Float(f64),
    Bool(bool),
    Str(String),
    None,
    /// A declared local that has not been assigned yet.
    Bottom,
    Closure(Closure),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(v.into())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::None => "NoneType",
            Value::Bottom => "unbound",
            Value::Closure(_) => "function",
        }
    }

    pub fn is_closure(&self) -> bool {
        matches!(self, Value::Closure(_))
    }
}

impl From<&Const> for Value {
    fn from(c: &Const) -> Self {
        match c {
            Const::Int(i) => Value::Int(i.clone()),
            Const::Float(x) => Value::Float(*x),
            Const::Bool(b) => Value::Bool(*b),
            Const::Str(s) => Value::Str(s.clone()),
            Const::None => Value::None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => f.write_str(&render_float(*x)),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Str(s) => f.write_str(&quote_str(s)),
            Value::None => f.write_str("None"),
            Value::Bottom => f.write_str("⊥"),
            Value::Closure(c) => write!(f, "closure@{}({})", c.entry, c.params.join(", ")),
        }
    }
}

// JSON encoding:
//   int      -> number (or {"int": "<digits>"} outside the i64 range)
//   float    -> number with a fractional part or exponent
//               (or {"float": "inf" | "-inf" | "nan"})
//   bool/str -> JSON bool/string, None -> null
//   bottom   -> {"bottom": true}
//   closure  -> {"closure": {"entry", "params", "defEnv", "defLoc"}}

impl Value {
    pub fn to_json(&self) -> Json {
        match self {
            Value::Int(i) => match i.to_i64() {
                Some(v) => json!(v),
                None => json!({ "int": i.to_string() }),
            },
            Value::Float(x) => {
                if x.is_finite() {
                    // serde_json keeps the `.0` so the value reads back as a float.
                    Json::from(*x)
                } else {
                    json!({ "float": render_float(*x) })
                }
            }
            Value::Bool(b) => json!(b),
            Value::Str(s) => json!(s),
            Value::None => Json::Null,
            Value::Bottom => json!({ "bottom": true }),
            Value::Closure(c) => json!({
                "closure": {
                    "entry": c.entry.0,
                    "params": c.params,
                    "defEnv": c.def_env.0,
                    "defLoc": c.def_loc.0,
                }
            }),
        }
    }

    pub fn from_json(j: &Json) -> Result<Value, String> {
        Ok(match j {
            Json::Null => Value::None,
            Json::Bool(b) => Value::Bool(*b),
            Json::String(s) => Value::Str(s.clone()),
            Json::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Value::int(i)
                } else if let Some(u) = n.as_u64() {
                    Value::Int(u.into())
                } else {
                    Value::Float(n.as_f64().ok_or("unrepresentable number")?)
                }
            }
            Json::Object(m) => {
                if let Some(Json::String(s)) = m.get("int") {
                    Value::Int(s.parse().map_err(|_| format!("bad integer {s:?}"))?)
                } else if let Some(Json::String(s)) = m.get("float") {
                    Value::Float(match s.as_str() {
                        "inf" => f64::INFINITY,
                        "-inf" => f64::NEG_INFINITY,
                        "nan" => f64::NAN,
                        other => return Err(format!("bad float {other:?}")),
                    })
                } else if m.get("bottom") == Some(&Json::Bool(true)) {
                    Value::Bottom
                } else if let Some(c) = m.get("closure") {
                    let field = |k: &str| {
                        c.get(k)
                            .and_then(Json::as_u64)
                            .map(|v| v as u32)
                            .ok_or_else(|| format!("closure field {k} missing"))
                    };
                    let params = c
                        .get("params")
                        .and_then(Json::as_array)
                        .ok_or("closure params missing")?
                        .iter()
                        .map(|p| p.as_str().map(str::to_string).ok_or("param must be a string"))
                        .collect::<Result<Vec<_>, _>>()?;
                    Value::Closure(Closure {
                        entry: Location(field("entry")?),
                        params,
                        def_env: EnvId(field("defEnv")?),
                        def_loc: Location(field("defLoc")?),
                    })
                } else {
                    return Err(format!("unrecognised value object {j}"));
                }
            }
            Json::Array(_) => return Err("arrays are not values".to_string()),
        })
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = Json::deserialize(d)?;
        Value::from_json(&j).map_err(serde::de::Error::custom)
    }
}
