//! Structured verification results.
//!
//! A certificate is a list of exact valuation comparisons plus a verdict.
//! Every quantity is recorded as a valuation (so `|x|_p = p^(-value)`),
//! which may be a fraction for Newton-polygon bounds and is `inf` for zero.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::padic::{format_rational, parse_rational, Rational, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Consistent,
    DivergenceWitness,
}

impl Verdict {
    /// Pass and Consistent are the positive outcomes.
    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Consistent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Consistent => "CONSISTENT",
            Verdict::DivergenceWitness => "DIVERGENCE-WITNESS",
        })
    }
}

/// Rational valuation level; `None` is +∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level(pub Option<Rational>);

impl Ord for Level {
    fn cmp(&self, other: &Level) -> Ordering {
        match (&self.0, &other.0) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Level) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Level {
    pub const INFINITY: Level = Level(None);

    pub fn finite(v: Rational) -> Level {
        Level(Some(v))
    }

    pub fn value(&self) -> Option<&Rational> {
        self.0.as_ref()
    }

    /// `self >= other` with +∞ the top element.
    pub fn at_least(&self, other: &Level) -> bool {
        self >= other
    }
}

impl From<Valuation> for Level {
    fn from(v: Valuation) -> Level {
        match v {
            Valuation::Finite(k) => Level(Some(Rational::from_integer(k.into()))),
            Valuation::Infinity => Level(None),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(v) => f.write_str(&format_rational(v)),
            None => f.write_str("inf"),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            return Ok(Level::INFINITY);
        }
        parse_rational(&s)
            .map(Level::finite)
            .map_err(serde::de::Error::custom)
    }
}

/// One exact comparison `observed >= required` (both valuations).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub component: Option<usize>,
    pub observed: Level,
    pub required: Level,
    pub holds: bool,
}

impl Check {
    pub fn new(index: u64, component: Option<usize>, observed: Level, required: Level) -> Check {
        let holds = observed.at_least(&required);
        Check {
            index,
            component,
            observed,
            required,
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub verdict: Verdict,
    /// Highest index covered by the checks; nothing beyond it is claimed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verified_through: Option<u64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_violation: Option<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    /// Raw per-index data the checks were derived from, when useful.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sequence: Vec<Level>,
}

impl Certificate {
    /// Pass iff every check holds; records the first failing one.
    pub fn from_checks(kind: impl Into<String>, checks: Vec<Check>) -> Certificate {
        let first_violation = checks.iter().find(|c| !c.holds).cloned();
        let verified_through = checks.iter().map(|c| c.index).max();
        Certificate {
            kind: kind.into(),
            verdict: if first_violation.is_none() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            verified_through,
            checks,
            first_violation,
            notes: Vec::new(),
            sequence: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Certificate {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rat;

    fn level_of_int(v: i64) -> Level {
        Level::finite(Rational::from_integer(v.into()))
    }

    #[test]
    fn level_order_and_serde() {
        assert!(Level::INFINITY.at_least(&level_of_int(100)));
        assert!(!level_of_int(1).at_least(&Level::INFINITY));
        assert!(Level::finite(rat(3, 2)).at_least(&level_of_int(1)));
        let s = serde_json::to_string(&Level::finite(rat(-3, 2))).unwrap();
        assert_eq!(s, "\"-3/2\"");
        let back: Level = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Level::finite(rat(-3, 2)));
    }

    #[test]
    fn first_violation_recorded() {
        let checks = vec![
            Check::new(0, None, level_of_int(2), level_of_int(1)),
            Check::new(1, None, level_of_int(0), level_of_int(1)),
            Check::new(2, None, level_of_int(-3), level_of_int(1)),
        ];
        let cert = Certificate::from_checks("demo", checks);
        assert_eq!(cert.verdict, Verdict::Fail);
        assert_eq!(cert.first_violation.unwrap().index, 1);
        assert_eq!(cert.verified_through, Some(2));
    }
}
