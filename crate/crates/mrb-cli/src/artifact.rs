//! Deterministic JSON rendering for output artifacts.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly; object keys come out sorted (serde_json's
//! default map), so identical runs produce byte-identical artifacts.

use serde_json::Value;

use mrb::Skew64;

/// Render a JSON value with fixed float formatting.
pub fn render(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                out.push_str(&format_float(f));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            newline(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            newline(indent, out);
            out.push('}');
        }
    }
}

fn newline(indent: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// 17 significant digits: exact round-trip for every finite f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON form of a direction: `{"n": ..., "coords": [...]}`.
pub fn skew_value(s: &Skew64) -> Value {
    let coords: Vec<Value> = s
        .coords()
        .iter()
        .map(|&c| Value::from(c))
        .collect();
    serde_json::json!({ "n": s.n(), "coords": coords })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 2.0_f64.powi(-40), 12345.678901234567, -0.0] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn rendering_is_valid_json_and_stable() {
        let v = serde_json::json!({
            "b": [1.0_f64, 2.5_f64],
            "a": 3_u64,
            "nested": { "x": true, "y": "z" }
        });
        let first = render(&v);
        let second = render(&v);
        assert_eq!(first, second);
        let parsed: Value = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed["a"], serde_json::json!(3));
        assert_eq!(parsed["b"][1], serde_json::json!(2.5));
    }
}
