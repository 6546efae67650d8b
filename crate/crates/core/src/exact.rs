//! Exact rationals, serialized as `{"num": int, "den": int}` with
//! arbitrary-size JSON integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Exact(BigRational::one())
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Exact(BigRational::from_integer(v.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn pow(&self, e: i32) -> Self {
        Exact(num_traits::Pow::pow(&self.0, e))
    }

    /// Smallest integer at least `self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            // both huge: scale down first
            _ => {
                let shift = self.denom().bits().saturating_sub(60);
                let num = self.numer() >> shift;
                let den = self.denom() >> shift;
                num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::ops::Mul for &Exact {
    type Output = Exact;
    fn mul(self, rhs: &Exact) -> Exact {
        Exact(&self.0 * &rhs.0)
    }
}

impl std::ops::Div for &Exact {
    type Output = Exact;
    fn div(self, rhs: &Exact) -> Exact {
        Exact(&self.0 / &rhs.0)
    }
}

fn big_number(v: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&v.to_string()).expect("decimal integer is a JSON number")
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: serde_json::Number,
    den: serde_json::Number,
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            num: big_number(self.numer()),
            den: big_number(self.denom()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let parse = |n: &serde_json::Number| {
            BigInt::from_str(&n.to_string()).map_err(|_| D::Error::custom("expected an integer"))
        };
        let (num, den) = (parse(&w.num)?, parse(&w.den)?);
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Exact(BigRational::new(num, den)))
    }
}

/// Serde helper for big unsigned integers as plain JSON numbers.
pub mod big_uint {
    use super::*;
    use num_bigint::BigUint;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        serde_json::Number::from_str(&v.to_string())
            .expect("decimal integer is a JSON number")
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let n = serde_json::Number::deserialize(d)?;
        BigUint::from_str(&n.to_string()).map_err(|_| D::Error::custom("expected an integer"))
    }
}
