//! Small JSON helpers for big integers.

use rug::Integer;
use serde_json::Value;

/// JSON number when the value fits in `i64`, decimal string otherwise.
pub fn int(x: &Integer) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

/// Parse what [`int`] produces.
pub fn parse_int(v: &Value) -> Option<Integer> {
    match v {
        Value::Number(n) => n.as_i64().map(Integer::from),
        Value::String(s) => s.parse::<Integer>().ok(),
        _ => None,
    }
}
