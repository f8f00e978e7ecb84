//! Exact rational numbers used for every length, rate, completion time and rank.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serializer};

/// Reduced fraction with a positive denominator.
///
/// `Ratio` keeps values normalized after every operation, so two values compare
/// equal exactly when they denote the same number.
pub type Rational = Ratio<i64>;

/// Shorthand for `numer / denom`. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid rational {:?}: expected \"p\" or \"p/q\"",
            self.0
        )
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `"p"` or `"p/q"` with decimal integers; whitespace around the parts is
/// not accepted.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let numer: i64 = num.parse().map_err(|_| err())?;
    let denom: i64 = den.parse().map_err(|_| err())?;
    if denom == 0 || den.starts_with('+') || num.starts_with('+') {
        return Err(err());
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Arbitrary-precision copy, for sums whose denominators outgrow `i64`.
pub fn widen(value: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*value.numer()), BigInt::from(*value.denom()))
}

/// The `i64` form when numerator and denominator both fit.
pub fn narrow(value: &BigRational) -> Option<Rational> {
    Some(Rational::new(
        value.numer().to_i64()?,
        value.denom().to_i64()?,
    ))
}

pub fn format_big(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn big_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Lossy conversion for human-readable output only.
pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

/// Six significant digits, used by the `--decimal` display column.
pub fn format_decimal(value: &Rational) -> String {
    format_f64(to_f64(value))
}

pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = 6 - 1 - x.abs().log10().floor() as i32;
    if digits >= 0 {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.5e}", x)
    }
}

pub(crate) fn is_positive(value: &Rational) -> bool {
    value.is_positive()
}

pub(crate) fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

pub(crate) fn half_rank(twice: u64) -> Rational {
    rat(twice as i64, 2)
}

pub(crate) fn zero() -> Rational {
    Rational::zero()
}

pub(crate) fn one() -> Rational {
    Rational::one()
}

/// Serde adapter that reads and writes rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(de::Error::custom)
    }
}
