//! Serde helpers writing non-finite floats as `"inf"`, `"-inf"` and `"nan"`
//! so that certificates stay valid JSON and round-trip exactly.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

struct FloatVisitor;

impl<'de> Visitor<'de> for FloatVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        match v {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(FloatVisitor)
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Wrapped(#[serde(with = "self")] f64);

/// The same encoding for every element of a vector.
pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &x in v {
            seq.serialize_element(&Wrapped(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let w: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(w.into_iter().map(|x| x.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize)]
    struct Row {
        #[serde(with = "crate::num")]
        x: f64,
        #[serde(with = "crate::num::vec")]
        v: Vec<f64>,
    }

    #[test]
    fn infinities_round_trip() {
        let r = Row {
            x: f64::INFINITY,
            v: vec![1.5, f64::NEG_INFINITY, 0.1 + 0.2],
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"x":"inf","v":[1.5,"-inf",0.30000000000000004]}"#);
        let back: Row = serde_json::from_str(&s).unwrap();
        assert_eq!(back.x, f64::INFINITY);
        assert_eq!(back.v[1], f64::NEG_INFINITY);
        assert_eq!(back.v[2], 0.1 + 0.2);
        let nan: Row = serde_json::from_str(r#"{"x":"nan","v":[]}"#).unwrap();
        assert!(nan.x.is_nan());
        assert!(serde_json::from_str::<Row>(r#"{"x":"big","v":[]}"#).is_err());
    }
}
