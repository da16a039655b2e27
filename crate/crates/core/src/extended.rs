//! Extended reals: a finite value or positive infinity.
//!
//! Results never carry IEEE infinities or NaN. A divergent quantity is
//! represented by [`ExtendedReal::Infinite`], which serializes as
//! `{"finite": false, "value": "inf"}`; finite values serialize as
//! `{"finite": true, "value": <number>}`.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Returns the finite value, panicking on `Infinite`. Intended for tests and
    /// call sites that already checked existence.
    pub fn unwrap(&self) -> f64 {
        self.finite().expect("called `ExtendedReal::unwrap` on an infinite value")
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(f(v)),
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ExtendedReal", 2)?;
        match *self {
            ExtendedReal::Finite(v) => {
                s.serialize_field("finite", &true)?;
                s.serialize_field("value", &v)?;
            }
            ExtendedReal::Infinite => {
                s.serialize_field("finite", &false)?;
                s.serialize_field("value", "inf")?;
            }
        }
        s.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Tagged {
    finite: bool,
    value: serde_json::Value,
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let tagged = Tagged::deserialize(deserializer)?;
        match (tagged.finite, &tagged.value) {
            (true, serde_json::Value::Number(n)) => n
                .as_f64()
                .filter(|v| v.is_finite())
                .map(ExtendedReal::Finite)
                .ok_or_else(|| de::Error::custom("finite value out of range")),
            (false, serde_json::Value::String(s)) if s == "inf" => Ok(ExtendedReal::Infinite),
            _ => Err(de::Error::custom(
                "expected {\"finite\": true, \"value\": <number>} or {\"finite\": false, \"value\": \"inf\"}",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        let inf = serde_json::to_string(&ExtendedReal::Infinite).unwrap();
        assert_eq!(inf, r#"{"finite":false,"value":"inf"}"#);
        let fin = serde_json::to_string(&ExtendedReal::Finite(1.5)).unwrap();
        assert_eq!(fin, r#"{"finite":true,"value":1.5}"#);
        assert_eq!(
            serde_json::from_str::<ExtendedReal>(&inf).unwrap(),
            ExtendedReal::Infinite
        );
        assert_eq!(
            serde_json::from_str::<ExtendedReal>(&fin).unwrap(),
            ExtendedReal::Finite(1.5)
        );
    }

    #[test]
    fn rejects_mixed_tags() {
        assert!(serde_json::from_str::<ExtendedReal>(r#"{"finite":true,"value":"inf"}"#).is_err());
        assert!(serde_json::from_str::<ExtendedReal>(r#"{"finite":false,"value":1.0}"#).is_err());
    }
}
