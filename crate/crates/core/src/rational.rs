//! Exact arbitrary-precision fractions.
//!
//! Every size, load, cost and ratio in the crate is a [`Rational`]. Values are
//! kept in lowest terms with a positive denominator, so structural equality is
//! numeric equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer / denom`, reduced. Panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn integer(value: i64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// Lossy decimal view, for human-facing convenience columns only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `self * unit` as an exact `u64`, or `None` if that is not a
    /// non-negative integer that fits.
    pub fn scaled(&self, unit: u64) -> Option<u64> {
        let scaled = &self.0 * BigRational::from_integer(unit.into());
        if !scaled.is_integer() || scaled.is_negative() {
            return None;
        }
        scaled.to_integer().to_u64()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Least common multiple of the denominators of `values` (1 when empty).
    pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
        values
            .into_iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::integer(value)
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"` or a bare integer `"p"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|e| Error::Parse(format!("bad fraction {s:?}: {e}")))
        };
        match s.split_once('/') {
            Some((p, q)) => Rational::from_big(parse(p)?, parse(q)?),
            None => Ok(Rational(BigRational::from_integer(parse(s)?))),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_prints() {
        assert_eq!(Rational::new(2, 8).to_string(), "1/4");
        assert_eq!(Rational::new(6, 3).to_string(), "2");
        assert_eq!(Rational::new(1, -2).to_string(), "-1/2");
    }

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!(" 7 ".parse::<Rational>().unwrap(), Rational::integer(7));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x/2".parse::<Rational>().is_err());
    }

    #[test]
    fn scaling_is_exact() {
        assert_eq!(Rational::new(3, 4).scaled(8), Some(6));
        assert_eq!(Rational::new(1, 3).scaled(4), None);
        assert_eq!(Rational::zero().scaled(1), Some(0));
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [Rational::new(1, 3), Rational::new(1, 2)];
        assert_eq!(Rational::lcm_of_denominators(&v), BigInt::from(6));
        assert_eq!(Rational::lcm_of_denominators(&[]), BigInt::from(1));
    }

    #[test]
    fn ceil_and_ordering() {
        assert_eq!(Rational::new(5, 4).ceil(), BigInt::from(2));
        assert_eq!(Rational::integer(2).ceil(), BigInt::from(2));
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
    }
}
