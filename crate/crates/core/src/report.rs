//! JSON rendering of reports.
//!
//! Floats are written with 17 significant digits so they round-trip exactly;
//! `±∞` and NaN, which JSON cannot represent, become the strings `"inf"`,
//! `"-inf"` and `"nan"`.

use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::{Number, Value};

/// Values containing floats that serialize through [`float`].
pub trait JsonFloat {
    fn to_json(&self) -> Value;
}

impl JsonFloat for f64 {
    fn to_json(&self) -> Value {
        let x = *self;
        if x.is_nan() {
            Value::String("nan".into())
        } else if x.is_infinite() {
            Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
        } else {
            Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON"))
        }
    }
}

impl<T: JsonFloat> JsonFloat for Option<T> {
    fn to_json(&self) -> Value {
        self.as_ref().map_or(Value::Null, JsonFloat::to_json)
    }
}

impl<T: JsonFloat> JsonFloat for Vec<T> {
    fn to_json(&self) -> Value {
        Value::Array(self.iter().map(JsonFloat::to_json).collect())
    }
}

impl<T: JsonFloat, const N: usize> JsonFloat for [T; N] {
    fn to_json(&self) -> Value {
        Value::Array(self.iter().map(JsonFloat::to_json).collect())
    }
}

impl<A: JsonFloat, B: JsonFloat> JsonFloat for (A, B) {
    fn to_json(&self) -> Value {
        Value::Array(vec![self.0.to_json(), self.1.to_json()])
    }
}

/// `serialize_with` hook for float-valued fields.
pub fn float<T: JsonFloat, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    x.to_json().serialize(s)
}

/// A JSON document for `report`, pretty-printed with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("reports serialize infallibly");
    out.push('\n');
    out
}

/// `{"error": {"kind": …, "detail": …}}`.
pub fn error_json(error: &crate::error::Error) -> String {
    to_json(&serde_json::json!({ "error": { "kind": error.kind(), "detail": error.to_string() } }))
}

/// Parses the float encoding used in reports back into `f64`.
pub fn parse_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_str().parse().ok(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        #[serde(serialize_with = "float")]
        x: f64,
        #[serde(serialize_with = "float")]
        xs: Vec<f64>,
        #[serde(serialize_with = "float")]
        maybe: Option<[f64; 2]>,
    }

    #[test]
    fn floats_round_trip() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, f64::MIN_POSITIVE, 123456789.12345679];
        for x in values {
            let v = x.to_json();
            assert_eq!(parse_float(&v), Some(x));
        }
        assert_eq!(0.1.to_json().to_string(), "1.0000000000000001e-1");
    }

    #[test]
    fn non_finite_values_are_strings() {
        let doc = to_json(&Sample { x: f64::INFINITY, xs: vec![f64::NEG_INFINITY, f64::NAN], maybe: None });
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["x"], "inf");
        assert_eq!(v["xs"][0], "-inf");
        assert_eq!(v["xs"][1], "nan");
        assert!(v["maybe"].is_null());
        assert_eq!(parse_float(&v["x"]), Some(f64::INFINITY));
    }

    #[test]
    fn error_documents() {
        let doc = error_json(&crate::error::Error::SingularScaling { u: 1.0, v: 0.0 });
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["error"]["kind"], "singular_scaling");
    }
}
