//! Primitive operators on values.
//!
//! Arithmetic follows the source language on ints and floats: `/` always
//! produces a float, `//` and `%` floor towards negative infinity. Booleans
//! are not numbers here; `and`, `or`, `not` and conditions need booleans.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::value::Value;
use super::{ErrorKind, Fault};
use crate::syntax::Bop;

fn to_f64(i: &BigInt) -> f64 {
    i.to_f64().unwrap_or(f64::NAN)
}

enum Num<'a> {
    Int(&'a BigInt),
    Float(f64),
}

fn num(v: &Value) -> Option<Num<'_>> {
    match v {
        Value::Int(i) => Some(Num::Int(i)),
        Value::Float(x) => Some(Num::Float(*x)),
        _ => None,
    }
}

fn as_float(n: &Num<'_>) -> f64 {
    match n {
        Num::Int(i) => to_f64(i),
        Num::Float(x) => *x,
    }
}

fn mismatch(op: &str, l: &Value, r: &Value) -> Fault {
    Fault::new(
        ErrorKind::TypeMismatch,
        format!(
            "unsupported operand types for {op}: '{}' and '{}'",
            l.type_name(),
            r.type_name()
        ),
    )
}

fn div_zero(op: &str) -> Fault {
    let what = match op {
        "%" => "modulo by zero",
        _ => "division by zero",
    };
    Fault::new(ErrorKind::DivisionByZero, what)
}

/// Float floor division and modulo, as the source language computes them.
fn float_divmod(vx: f64, wx: f64) -> (f64, f64) {
    let mut m = vx % wx;
    let mut div = (vx - m) / wx;
    if m != 0.0 {
        if (wx < 0.0) != (m < 0.0) {
            m += wx;
            div -= 1.0;
        }
    } else {
        m = 0.0_f64.copysign(wx);
    }
    let floordiv = if div != 0.0 {
        let mut f = div.floor();
        if div - f > 0.5 {
            f += 1.0;
        }
        f
    } else {
        0.0_f64.copysign(vx / wx)
    };
    (floordiv, m)
}

/// Applies a strict (non-short-circuit) binary operator.
pub(crate) fn binary(op: Bop, l: &Value, r: &Value) -> Result<Value, Fault> {
    let sym = op.symbol();
    match op {
        Bop::Eq => return Ok(Value::Bool(equal(l, r))),
        Bop::Ne => return Ok(Value::Bool(!equal(l, r))),
        Bop::Lt | Bop::Le | Bop::Gt | Bop::Ge => {
            let ord = compare(l, r).ok_or_else(|| mismatch(sym, l, r))?;
            let b = match op {
                Bop::Lt => ord == Ordering::Less,
                Bop::Le => ord != Ordering::Greater,
                Bop::Gt => ord == Ordering::Greater,
                _ => ord != Ordering::Less,
            };
            return Ok(Value::Bool(b));
        }
        Bop::And | Bop::Or => unreachable!("short-circuit operators are evaluated by the machine"),
        _ => {}
    }
    if op == Bop::Add {
        if let (Value::Str(a), Value::Str(b)) = (l, r) {
            return Ok(Value::Str(format!("{a}{b}")));
        }
    }
    let (Some(a), Some(b)) = (num(l), num(r)) else {
        return Err(mismatch(sym, l, r));
    };
    if let (Num::Int(a), Num::Int(b)) = (&a, &b) {
        return Ok(match op {
            Bop::Add => Value::Int(*a + *b),
            Bop::Sub => Value::Int(*a - *b),
            Bop::Mul => Value::Int(*a * *b),
            Bop::Div => {
                if b.is_zero() {
                    return Err(div_zero(sym));
                }
                Value::Float(int_true_div(a, b))
            }
            Bop::FloorDiv => {
                if b.is_zero() {
                    return Err(div_zero(sym));
                }
                Value::Int(a.div_floor(b))
            }
            Bop::Mod => {
                if b.is_zero() {
                    return Err(div_zero(sym));
                }
                Value::Int(a.mod_floor(b))
            }
            _ => unreachable!(),
        });
    }
    let (x, y) = (as_float(&a), as_float(&b));
    Ok(Value::Float(match op {
        Bop::Add => x + y,
        Bop::Sub => x - y,
        Bop::Mul => x * y,
        Bop::Div => {
            if y == 0.0 {
                return Err(div_zero(sym));
            }
            x / y
        }
        Bop::FloorDiv => {
            if y == 0.0 {
                return Err(div_zero(sym));
            }
            float_divmod(x, y).0
        }
        Bop::Mod => {
            if y == 0.0 {
                return Err(div_zero(sym));
            }
            float_divmod(x, y).1
        }
        _ => unreachable!(),
    }))
}

/// True division of integers. Exact when both fit in an f64 mantissa;
/// otherwise divides the rounded values.
fn int_true_div(a: &BigInt, b: &BigInt) -> f64 {
    to_f64(a) / to_f64(b)
}

/// Equality across kinds: ints and floats compare numerically, other kinds
/// only equal their own kind.
pub(crate) fn equal(l: &Value, r: &Value) -> bool {
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => a == b,
        (Value::Int(_), Value::Float(_)) | (Value::Float(_), Value::Int(_)) | (Value::Float(_), Value::Float(_)) => {
            compare(l, r) == Some(Ordering::Equal)
        }
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::Str(a), Value::Str(b)) => a == b,
        (Value::None, Value::None) => true,
        (Value::Closure(a), Value::Closure(b)) => a == b,
        _ => false,
    }
}

fn compare(l: &Value, r: &Value) -> Option<Ordering> {
    match (l, r) {
        (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
        (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
        (Value::Int(a), Value::Float(y)) => compare_int_float(a, *y),
        (Value::Float(x), Value::Int(b)) => compare_int_float(b, *x).map(Ordering::reverse),
        (Value::Float(x), Value::Float(y)) => x.partial_cmp(y),
        _ => None,
    }
}

fn compare_int_float(a: &BigInt, y: f64) -> Option<Ordering> {
    if y.is_nan() {
        return None;
    }
    if y.is_infinite() {
        return Some(if y > 0.0 { Ordering::Less } else { Ordering::Greater });
    }
    // Compare exactly: split y into its integral part and fraction.
    let whole = y.trunc();
    let whole_int = BigInt::from_f64_exact(whole);
    match a.cmp(&whole_int) {
        Ordering::Equal => {
            let frac = y - whole;
            Some(if frac > 0.0 {
                Ordering::Less
            } else if frac < 0.0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            })
        }
        other => Some(other),
    }
}

trait FromF64Exact {
    fn from_f64_exact(x: f64) -> BigInt;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> BigInt {
        num_traits::FromPrimitive::from_f64(x).expect("finite integral float converts")
    }
}

pub(crate) fn negate(v: &Value) -> Result<Value, Fault> {
    match v {
        Value::Int(i) => Ok(Value::Int(-i)),
        Value::Float(x) => Ok(Value::Float(-x)),
        other => Err(Fault::new(
            ErrorKind::TypeMismatch,
            format!("bad operand type for unary -: '{}'", other.type_name()),
        )),
    }
}

pub(crate) fn not(v: &Value) -> Result<Value, Fault> {
    match v {
        Value::Bool(b) => Ok(Value::Bool(!b)),
        other => Err(Fault::new(
            ErrorKind::TypeMismatch,
            format!("operand of not must be a bool, got '{}'", other.type_name()),
        )),
    }
}
