//! Exact rational numbers.
//!
//! Every coefficient, threshold, measure and prior is a [`Rational`]. Text form
//! is `"num/den"` or a bare integer, always in lowest terms when printed.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}: expected \"num/den\" or an integer")]
pub struct RationalParseError(pub String);

/// Parses `-?NAT(/NAT)?`. Zero denominators, floats and stray signs are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) || !den.is_none_or(digits) {
        return Err(err());
    }
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = match den {
        Some(d) => d.parse().map_err(|_| err())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err());
    }
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Lowest-terms text form; integers print without a denominator.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

/// Serde adapter storing a rational as an exact string. JSON numbers are
/// refused so that floating point never leaks into a model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRational(pub Rational);

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ExactRational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an exact rational string such as \"1/2\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactRational, E> {
                parse_rational(v).map(ExactRational).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExactRational, E> {
                Err(E::custom(format!(
                    "numeric literal {v} rejected: rationals must be written as strings like \"1/2\""
                )))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactRational, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactRational, E> {
                self.visit_f64(v as f64)
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(format_rational(&parse_rational("6/3").unwrap()), "2");
        assert_eq!(format_rational(&ratio(-2, 6)), "-1/3");
    }

    #[test]
    fn rejects_floats_and_garbage() {
        for bad in ["0.5", "1/0", "", "/2", "1/-2", "--1", "1e3", "+1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn json_numbers_are_refused() {
        assert!(serde_json::from_str::<ExactRational>("0.5").is_err());
        assert!(serde_json::from_str::<ExactRational>("1").is_err());
        let ok: ExactRational = serde_json::from_str("\"1/3\"").unwrap();
        assert_eq!(ok.0, ratio(1, 3));
    }
}
