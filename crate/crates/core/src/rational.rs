//! Exact rational numbers used on every decision path.
//!
//! Ratios, thresholds, prices and expected payoffs are all compared exactly;
//! floating point only appears when formatting reports.

use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::error::Error;

/// Rational number in lowest terms with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;

/// Builds `numer / denom`, reduced.
///
/// Panics if `denom` is zero.
pub fn ratio(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub fn int(value: i128) -> Rational {
    Rational::from_integer(value)
}

/// Parses `"p/q"`, `"p"` or a signed integer literal with surrounding whitespace allowed.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let trimmed = text.trim();
    let bad = || Error::BadRational(text.to_string());
    match trimmed.split_once('/') {
        Some((n, d)) => {
            let n = i128::from_str(n.trim()).map_err(|_| bad())?;
            let d = i128::from_str(d.trim()).map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => i128::from_str(trimmed).map(int).map_err(|_| bad()),
    }
}

/// Decimal approximation for display columns.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"` (or `"p"` for integers) followed by a six-digit decimal.
pub fn describe(value: &Rational) -> String {
    format!("{value} (~{:.6})", to_f64(value))
}

pub(crate) mod serde_rational {
    //! Accepts integers or `"p/q"` strings; always writes strings.

    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    use super::{int, parse_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(int(v.into()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(int(v.into()))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                parse_rational(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        use super::Rational;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => super::serialize(v, serializer),
                None => serializer.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
            #[derive(Deserialize)]
            struct Wrapped(#[serde(with = "super")] Rational);
            Ok(Some(Wrapped::deserialize(deserializer)?.0))
        }
    }
}
