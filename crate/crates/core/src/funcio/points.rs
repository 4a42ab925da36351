use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FuncError;
use crate::exactnum::Rational;

/// An eventually constant binary sequence `prefix ⌢ tail^ω`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct E0Point {
    prefix: String,
    tail: u8,
}

#[derive(Deserialize)]
struct RawE0Point {
    prefix: String,
    tail: u8,
}

impl<'de> Deserialize<'de> for E0Point {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawE0Point::deserialize(deserializer)?;
        E0Point::new(&raw.prefix, raw.tail).map_err(serde::de::Error::custom)
    }
}

impl E0Point {
    pub fn new(prefix: &str, tail: u8) -> Result<Self, FuncError> {
        if tail > 1 || !prefix.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(FuncError::BadE0Point {
                prefix: prefix.to_string(),
                tail,
            });
        }
        Ok(E0Point {
            prefix: prefix.to_string(),
            tail,
        })
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn tail(&self) -> u8 {
        self.tail
    }

    /// The `n`-th bit of the sequence.
    pub fn bit(&self, n: usize) -> u8 {
        self.prefix.as_bytes().get(n).map_or(self.tail, |b| b - b'0')
    }

    /// Eventual equality; for eventually constant sequences this is agreement
    /// of the tails.
    pub fn eventually_equal(&self, other: &E0Point) -> bool {
        self.tail == other.tail
    }
}

impl fmt::Debug for E0Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^w", self.prefix, self.tail)
    }
}

/// Data a pair function may read off a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Rational(Rational),
    E0(E0Point),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}

impl Point {
    pub fn bare(label: impl Into<String>) -> Self {
        Point {
            label: label.into(),
            payload: None,
        }
    }

    pub fn rational(label: impl Into<String>, value: Rational) -> Self {
        Point {
            label: label.into(),
            payload: Some(Payload::Rational(value)),
        }
    }

    pub fn e0(label: impl Into<String>, point: E0Point) -> Self {
        Point {
            label: label.into(),
            payload: Some(Payload::E0(point)),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.payload {
            Some(Payload::Rational(r)) => Some(r),
            _ => None,
        }
    }

    pub fn as_e0(&self) -> Option<&E0Point> {
        match &self.payload {
            Some(Payload::E0(p)) => Some(p),
            _ => None,
        }
    }
}

pub fn parse_points(text: &str) -> Result<Vec<Point>, FuncError> {
    serde_json::from_str(text).map_err(|e| FuncError::Format(format!("points file: {e}")))
}

pub fn load_points(path: impl AsRef<Path>) -> Result<Vec<Point>, FuncError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FuncError::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn points_file_shapes() {
        let pts = parse_points(
            r#"[{"label":"a","payload":"3/4"},{"label":"b","payload":{"prefix":"01","tail":1}},{"label":"c"}]"#,
        )
        .unwrap();
        assert_eq!(pts[0].as_rational(), Some(&rat("3/4")));
        assert_eq!(pts[1].as_e0().unwrap().bit(1), 1);
        assert_eq!(pts[1].as_e0().unwrap().bit(100), 1);
        assert_eq!(pts[2].payload, None);
    }

    #[test]
    fn bad_payloads() {
        assert!(parse_points(r#"[{"label":"a","payload":"1/0"}]"#).is_err());
        assert!(parse_points(r#"[{"label":"a","payload":{"prefix":"012","tail":0}}]"#).is_err());
        assert!(parse_points(r#"[{"label":"a","payload":{"prefix":"01","tail":2}}]"#).is_err());
        assert!(parse_points(r#"{"label":"a"}"#).is_err());
    }

    #[test]
    fn e0_matches_eventual_equality_definition() {
        // brute force: bits agree from some N on, looking well past both prefixes
        let mut all = Vec::new();
        for len in 0..=3usize {
            for bits in 0..(1u32 << len) {
                let prefix: String = (0..len).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect();
                for tail in 0..=1 {
                    all.push(E0Point::new(&prefix, tail).unwrap());
                }
            }
        }
        for x in &all {
            for y in &all {
                let n = x.prefix().len().max(y.prefix().len());
                let agree_from_n = (n..n + 8).all(|i| x.bit(i) == y.bit(i));
                assert_eq!(x.eventually_equal(y), agree_from_n);
            }
        }
    }
}
