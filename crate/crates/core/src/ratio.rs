//! Exact rational numbers.
//!
//! Every ratio, coordinate and weight in the crate is a [`Ratio`]: an
//! arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. `0` and `1` are always `0/1` and `1/1`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio(BigRational);

impl Ratio {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, Error> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Ratio(BigRational::new(num.into(), den)))
    }

    /// Panicking constructor for literals known to be valid.
    pub fn frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn int(value: impl Into<BigInt>) -> Self {
        Ratio(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Ratio(BigRational::zero())
    }

    pub fn one() -> Self {
        Ratio(BigRational::one())
    }

    pub fn from_big(inner: BigRational) -> Self {
        Ratio(inner)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Ratio {
        Ratio(self.0.abs())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Ratio {
        Ratio(self.0.recip())
    }

    /// `1 - self`.
    pub fn complement(&self) -> Ratio {
        Ratio(BigRational::one() - &self.0)
    }

    /// True when `0 <= self <= 1`.
    pub fn is_unit(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn min_of(a: &Ratio, b: &Ratio) -> Ratio {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_of(a: &Ratio, b: &Ratio) -> Ratio {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Numerator and denominator as machine integers, if they fit.
    pub fn to_u64_pair(&self) -> Option<(u64, u64)> {
        Some((self.numer().to_u64()?, self.denom().to_u64()?))
    }

    /// Lowest common multiple of the denominators of `values`.
    pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Ratio>) -> BigInt {
        values
            .into_iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
    }
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio::zero()
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Ratio::new(n, d)
            }
            None => Ok(Ratio::int(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl From<i64> for Ratio {
    fn from(v: i64) -> Self {
        Ratio::int(v)
    }
}

impl From<BigInt> for Ratio {
    fn from(v: BigInt) -> Self {
        Ratio::int(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Ratio> for Ratio {
            type Output = Ratio;
            fn $method(self, rhs: Ratio) -> Ratio {
                Ratio(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Ratio> for Ratio {
            type Output = Ratio;
            fn $method(self, rhs: &Ratio) -> Ratio {
                Ratio(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Ratio> for &Ratio {
            type Output = Ratio;
            fn $method(self, rhs: Ratio) -> Ratio {
                Ratio((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Ratio> for &Ratio {
            type Output = Ratio;
            fn $method(self, rhs: &Ratio) -> Ratio {
                Ratio((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio(-self.0)
    }
}

impl Neg for &Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio(-&self.0)
    }
}

impl AddAssign<&Ratio> for Ratio {
    fn add_assign(&mut self, rhs: &Ratio) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Ratio> for Ratio {
    fn add_assign(&mut self, rhs: Ratio) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Ratio> for Ratio {
    fn sub_assign(&mut self, rhs: &Ratio) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Ratio {
    fn sum<I: Iterator<Item = Ratio>>(iter: I) -> Ratio {
        iter.fold(Ratio::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Ratio> for Ratio {
    fn sum<I: Iterator<Item = &'a Ratio>>(iter: I) -> Ratio {
        iter.fold(Ratio::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for Ratio {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer((*other).into())
    }
}

impl PartialOrd<i64> for Ratio {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0
            .partial_cmp(&BigRational::from_integer((*other).into()))
    }
}

// Files carry `{"num": n, "den": d}`; integers that do not fit in 64 bits are
// written as decimal strings.

fn big_to_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::from(v.to_string()),
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Ratio", 2)?;
        st.serialize_field("num", &big_to_json(self.numer()))?;
        st.serialize_field("den", &big_to_json(self.denom()))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Int(i64),
    Uint(u64),
    Text(String),
}

impl IntRepr {
    fn into_big<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntRepr::Int(i) => Ok(i.into()),
            IntRepr::Uint(u) => Ok(u.into()),
            IntRepr::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| E::custom(format!("not an integer: {s:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatioVisitor;

        impl<'de> Visitor<'de> for RatioVisitor {
            type Value = Ratio;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object {num, den} with integer fields, or a string \"n/d\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Ratio, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Ratio, A::Error> {
                let mut num = None;
                let mut den = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "num" => num = Some(map.next_value::<IntRepr>()?.into_big()?),
                        "den" => den = Some(map.next_value::<IntRepr>()?.into_big()?),
                        other => return Err(de::Error::unknown_field(other, &["num", "den"])),
                    }
                }
                let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
                let den = den.ok_or_else(|| de::Error::missing_field("den"))?;
                Ratio::new(num, den).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_any(RatioVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_on_construction() {
        let r = Ratio::frac(6, -8);
        assert_eq!(r.to_string(), "-3/4");
        assert_eq!(Ratio::zero().to_string(), "0/1");
        assert_eq!(Ratio::one().to_string(), "1/1");
    }

    #[test]
    fn parses_fraction_and_integer() {
        assert_eq!("2/4".parse::<Ratio>().unwrap(), Ratio::frac(1, 2));
        assert_eq!("3".parse::<Ratio>().unwrap(), Ratio::int(3));
        assert!("1/0".parse::<Ratio>().is_err());
        assert!("x/2".parse::<Ratio>().is_err());
    }

    #[test]
    fn json_uses_integer_pairs() {
        let r = Ratio::frac(2, 5);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"num":2,"den":5}"#);
        let back: Ratio = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let big: Ratio = serde_json::from_str(r#"{"num":"100000000000000000000000","den":3}"#).unwrap();
        let again: Ratio = serde_json::from_str(&serde_json::to_string(&big).unwrap()).unwrap();
        assert_eq!(big, again);
    }
}
