//! Exact rational scalars and the handful of helpers the solver needs on top
//! of `num-rational`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_big(v: &BigInt) -> Scalar {
    Scalar::from_integer(v.clone())
}

/// Number of bits needed for the larger of numerator and denominator.
pub fn bit_size(x: &Scalar) -> u64 {
    x.numer().bits().max(x.denom().bits())
}

pub fn max_bit_size<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> u64 {
    xs.into_iter().map(bit_size).max().unwrap_or(0)
}

/// Smallest integer `c >= 0` with `c * c >= x`.
pub fn ceil_sqrt(x: &Scalar) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let target = x.ceil().to_integer();
    let mut c = target.sqrt();
    if &c * &c < target {
        c += 1;
    }
    c
}

/// Smallest integer `c >= 0` with `c * c >= x` for an integer `x`.
pub fn ceil_sqrt_int(x: &BigInt) -> BigInt {
    ceil_sqrt(&Scalar::from_integer(x.clone()))
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `p/q`, including `/1` for integers.
pub fn format(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseScalarError(pub String);

/// Parses `p/q` or a bare integer `p`.
pub fn parse(s: &str) -> Result<Scalar, ParseScalarError> {
    let err = || ParseScalarError(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Scalar::new(n, d))
        }
        None => BigInt::from_str(t).map(Scalar::from_integer).map_err(|_| err()),
    }
}

pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    x.iter().zip(y).fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
}

pub fn is_nonneg(x: &[Scalar]) -> bool {
    x.iter().all(|v| !v.is_negative())
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Serde adapters that carry rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod opt_vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &Option<Vec<Scalar>>, s: S) -> Result<S::Ok, S::Error> {
            match xs {
                Some(v) => vec::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<Vec<Scalar>>, D::Error> {
            let raw = Option::<Vec<String>>::deserialize(d)?;
            raw.map(|v| {
                v.iter()
                    .map(|s| parse(s).map_err(D::Error::custom))
                    .collect()
            })
            .transpose()
        }
    }
}
