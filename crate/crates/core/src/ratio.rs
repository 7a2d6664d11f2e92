//! Exact rationals for gaps and thresholds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = num_rational::Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{input}` is not an exact rational (expected `p/q` or an integer): {reason}")]
pub struct ParseRationalError {
    input: String,
    reason: &'static str,
}

/// Parses `p/q` or a bare integer. Decimal notation is rejected so that
/// thresholds like 1/2 or 2/3 are never rounded.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(err("decimal notation is not accepted"));
    }
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num = i64::from_str(num).map_err(|_| err("bad numerator"))?;
    let den = i64::from_str(den).map_err(|_| err("bad denominator"))?;
    if den == 0 {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// `{"num": p, "den": q}` in lowest terms, with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RationalJson {
    fn from(r: Rational) -> Self {
        RationalJson {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

/// Display helper: `3/2`, or `1` for integers.
pub struct Exact(pub Rational);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub(crate) mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalJson::from(*r).serialize(s)
    }
}

pub(crate) mod serde_rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.map(RationalJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<RationalJson>::deserialize(d)? {
            None => Ok(None),
            Some(RationalJson { den: 0, .. }) => Err(serde::de::Error::custom("zero denominator")),
            Some(RationalJson { num, den }) => Ok(Some(Rational::new(num, den))),
        }
    }
}
