//! Exact monetary amounts.
//!
//! Every value, price and payment in the crate is a [`Money`]: an arbitrary
//! precision rational. Comparisons decide argmax ties and axiom inequalities,
//! so nothing here ever rounds. Conversion to `f64` exists only for
//! human-readable summaries.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of random bits in a uniform draw; draws are `k / 2^53`.
pub const UNIFORM_BITS: u32 = 53;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn one() -> Self {
        Money(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Money(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`. Panics if `denom` is zero.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Money(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// The dyadic rational `k / 2^53`, i.e. one uniform draw on `[0, 1)`.
    pub fn from_uniform_bits(k: u64) -> Self {
        debug_assert!(k < (1u64 << UNIFORM_BITS));
        Money(BigRational::new(
            BigInt::from(k),
            BigInt::one() << UNIFORM_BITS as usize,
        ))
    }

    /// Parses a finite decimal such as `"2.2"` or `"-0.05"`, or a fraction
    /// such as `"100/297"`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let err = |reason| Error::ParseMoney {
            text: text.to_string(),
            reason,
        };
        let t = text.trim();
        if t.is_empty() {
            return Err(err("empty string"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = parse_int(n).ok_or_else(|| err("bad numerator"))?;
            let d: BigInt = parse_int(d).ok_or_else(|| err("bad denominator"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Money(BigRational::new(n, d)));
        }
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(err("not a decimal number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err("not a decimal number"))?
        };
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let value = BigRational::new(numer, denom);
        Ok(Money(if negative { -value } else { value }))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `self / n` for a positive count `n`.
    pub fn div_count(&self, n: usize) -> Money {
        assert!(n > 0, "division by zero count");
        Money(&self.0 / BigRational::from_integer(BigInt::from(n)))
    }

    pub fn max_of<'a>(values: impl IntoIterator<Item = &'a Money>) -> Option<&'a Money> {
        values.into_iter().max()
    }

    /// Canonical text form: a terminating decimal when the denominator has
    /// only factors 2 and 5, otherwise `numer/denom`.
    pub fn to_canonical_string(&self) -> String {
        let numer = self.0.numer();
        let denom = self.0.denom();
        let mut rest = denom.clone();
        let mut twos = 0usize;
        let mut fives = 0usize;
        let two = BigInt::from(2u32);
        let five = BigInt::from(5u32);
        while rest.is_even() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return format!("{numer}/{denom}");
        }
        let scale = twos.max(fives);
        if scale == 0 {
            return numer.to_string();
        }
        let factor = num_traits::pow(BigInt::from(10u32), scale) / denom;
        let scaled = numer.abs() * factor;
        let mut digits = scaled.to_string();
        if digits.len() <= scale {
            digits = format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits);
        }
        let (int_part, frac_part) = digits.split_at(digits.len() - scale);
        let frac_part = frac_part.trim_end_matches('0');
        let sign = if numer.is_negative() { "-" } else { "" };
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({})", self.to_canonical_string())
    }
}

impl FromStr for Money {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Money::from_decimal(s)
    }
}

impl From<i64> for Money {
    fn from(n: i64) -> Self {
        Money::from_integer(n)
    }
}

impl From<BigRational> for Money {
    fn from(r: BigRational) -> Self {
        Money(r)
    }
}

// Values are always reduced, so hashing the parts agrees with equality.
impl Hash for Money {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.numer().hash(state);
        self.0.denom().hash(state);
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Money::from_decimal(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Money> for Money {
            type Output = Money;
            fn $method(self, rhs: Money) -> Money {
                Money(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Money> for Money {
            type Output = Money;
            fn $method(self, rhs: &'a Money) -> Money {
                Money(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $tr<Money> for &'a Money {
            type Output = Money;
            fn $method(self, rhs: Money) -> Money {
                Money((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Money> for &'a Money {
            type Output = Money;
            fn $method(self, rhs: &'b Money) -> Money {
                Money((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Money> for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Money> for Money {
    fn sub_assign(&mut self, rhs: &Money) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, x| acc + x)
    }
}
