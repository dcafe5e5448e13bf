//! Arbitrary-precision rational numbers.
//!
//! `Rat` wraps a canonical (reduced, positive-denominator) big rational and
//! renders as `"num/den"` on the wire. Every probability, payoff and price in
//! this crate is a `Rat`; floats only appear where a closed form involves a
//! square root or an iterative search.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

/// Exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn half() -> Self {
        Rat::new(1, 2)
    }

    pub fn quarter() -> Self {
        Rat::new(1, 4)
    }

    /// Exact binary value of a finite float.
    pub fn from_f64(x: f64) -> Result<Self, ParseRatError> {
        BigRational::from_float(x)
            .map(Rat)
            .ok_or(ParseRatError::NonFinite(x))
    }

    /// Parses a decimal literal such as `0.35` or `1e-9` into its exact
    /// base-10 value (not the nearest float).
    pub fn from_decimal_str(s: &str) -> Result<Self, ParseRatError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let bad = || ParseRatError::Malformed(s.to_string());
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((a, b)) => (a, b),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let all = format!("{int_part}{frac_part}");
        let mut numer: BigInt = all.parse().map_err(|_| bad())?;
        if neg {
            numer = -numer;
        }
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rat(value))
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn pow(&self, exp: u32) -> Rat {
        Rat(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn min(self, other: Rat) -> Rat {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Rat) -> Rat {
        std::cmp::max(self, other)
    }

    /// `true` when `0 <= self <= 1`.
    pub fn is_probability(&self) -> bool {
        !self.is_negative() && self.0 <= BigRational::one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with 12 significant digits.
    pub fn to_decimal(&self) -> String {
        decimal12(self.to_f64())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

/// Renders a float with 12 significant digits, trimming trailing zeros.
pub fn decimal12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl From<BigRational> for Rat {
    fn from(value: BigRational) -> Self {
        Rat(value)
    }
}

impl From<i64> for Rat {
    fn from(value: i64) -> Self {
        Rat::from_integer(value)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `"n"` or `"n/d"` with optional sign on the numerator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let numer: BigInt = n
            .parse()
            .map_err(|_| ParseRatError::Malformed(s.to_string()))?;
        if d.starts_with(['-', '+']) {
            return Err(ParseRatError::Malformed(s.to_string()));
        }
        let denom: BigInt = d
            .parse()
            .map_err(|_| ParseRatError::Malformed(s.to_string()))?;
        if denom.is_zero() {
            return Err(ParseRatError::ZeroDenominator(s.to_string()));
        }
        Ok(Rat(BigRational::new(numer, denom)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

impl PartialEq<i64> for Rat {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Rat {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0
            .partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        let r = Rat::new(4, -6);
        assert_eq!(r.to_string(), "-2/3");
        assert!(r.denom() > &BigInt::zero());
        assert_eq!(Rat::zero().to_string(), "0/1");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("2/3".parse::<Rat>().unwrap(), Rat::new(2, 3));
        assert_eq!("5".parse::<Rat>().unwrap(), Rat::from_integer(5));
        assert_eq!(" 6/8 ".parse::<Rat>().unwrap(), Rat::new(3, 4));
        assert!(matches!(
            "1/0".parse::<Rat>(),
            Err(ParseRatError::ZeroDenominator(_))
        ));
        assert!("1/-2".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(Rat::from_decimal_str("0.35").unwrap(), Rat::new(7, 20));
        assert_eq!(Rat::from_decimal_str("1e-3").unwrap(), Rat::new(1, 1000));
        assert_eq!(
            Rat::from_decimal_str("2.5E1").unwrap(),
            Rat::from_integer(25)
        );
        assert_eq!(Rat::from_decimal_str("-.5").unwrap(), Rat::new(-1, 2));
        assert!(Rat::from_decimal_str(".").is_err());
        assert!(Rat::from_decimal_str("1.2.3").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal12(1.0 / 24.0), "0.0416666666667");
        assert_eq!(decimal12(0.25), "0.25");
        assert_eq!(decimal12(0.0), "0");
        assert_eq!(Rat::new(1, 3).to_decimal(), "0.333333333333");
    }

    proptest! {
        #[test]
        fn string_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = Rat::new(n, d);
            let back: Rat = r.to_string().parse().unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(back.to_string(), r.to_string());
        }

        #[test]
        fn float_embedding_is_exact(x in -1.0e6f64..1.0e6) {
            prop_assert_eq!(Rat::from_f64(x).unwrap().to_f64(), x);
        }
    }
}
