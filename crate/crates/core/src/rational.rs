//! Exact rational scalars and their `p/q` text form.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `"p/q"` or `"p"`. Whitespace around the parts is tolerated,
/// decimals are not.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        text: text.to_string(),
        reason,
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("numerator is not an integer"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| err("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact value of a finite float (every finite `f64` is a dyadic rational).
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num::pow::pow(base.clone(), exp as usize)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Least common multiple of the denominators, as an integer.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn parse_point(text: &str) -> Result<Vec<Rational>, ParseRationalError> {
    text.split(',').map(parse_rational).collect()
}

pub fn format_point(p: &[Rational]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::super::{format_rational, parse_rational, Rational};
        use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(qs.len()))?;
            for q in qs {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod vecvec {
        use super::super::{format_rational, parse_rational, Rational};
        use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(qs: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<Vec<String>> = qs
                .iter()
                .map(|p| p.iter().map(format_rational).collect())
                .collect();
            text.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|t| parse_rational(t).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
