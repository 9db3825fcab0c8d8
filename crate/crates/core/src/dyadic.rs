//! Exact arithmetic over the dyadic rationals `Z[1/2]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("malformed dyadic `{0}`")]
    Malformed(String),
    #[error("denominator of `{0}` is not a power of two")]
    NotDyadic(String),
}

/// A dyadic rational `num / 2^exp`.
///
/// Always canonical: either `exp == 0` or `num` is odd, so structural
/// equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        if self.exp == 0 {
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: BigInt::from(n), exp: 0 }
    }

    /// `num / 2^exp` from machine integers.
    pub fn frac(num: i64, exp: u64) -> Self {
        Dyadic::new(BigInt::from(num), exp)
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic { num: BigInt::one() << (k as u64), exp: 0 }
        } else {
            Dyadic { num: BigInt::one(), exp: k.unsigned_abs() }
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// Exponent of the denominator: the value is `numerator / 2^denominator_exp`.
    pub fn denominator_exp(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp {
                Dyadic { num: self.num.clone(), exp: self.exp - k }
            } else {
                Dyadic { num: &self.num << (k - self.exp), exp: 0 }
            }
        } else {
            Dyadic::new(self.num.clone(), self.exp + k.unsigned_abs())
        }
    }

    pub fn half(&self) -> Self {
        self.mul_pow2(-1)
    }

    pub fn midpoint(&self, other: &Dyadic) -> Self {
        (self + other).half()
    }

    /// Writes a nonzero value as `odd * 2^v`, returning `(odd, v)`.
    pub fn two_adic(&self) -> Option<(BigInt, i64)> {
        if self.is_zero() {
            return None;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let odd = &self.num >> tz;
        Some((odd, tz as i64 - self.exp as i64))
    }

    /// `Some(k)` when the value is exactly `2^k`.
    pub fn log2_exact(&self) -> Option<i64> {
        match self.two_adic() {
            Some((odd, v)) if odd.is_one() => Some(v),
            _ => None,
        }
    }

    /// Whether the value is an integer multiple of `2^-k`.
    pub fn is_multiple_of_pow2_neg(&self, k: i64) -> bool {
        if self.is_zero() {
            return true;
        }
        if k >= 0 {
            self.exp <= k as u64
        } else {
            self.exp == 0 && self.num.trailing_zeros().unwrap_or(0) >= k.unsigned_abs()
        }
    }

    pub fn to_f64_lossy(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n * 2f64.powi(-(self.exp.min(i32::MAX as u64) as i32))
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

fn add_ref(a: &Dyadic, b: &Dyadic, negate_b: bool) -> Dyadic {
    let (hi, lo, b_is_hi) = if a.exp >= b.exp { (a, b, false) } else { (b, a, true) };
    let shift = hi.exp - lo.exp;
    let lo_num = if shift == 0 { lo.num.clone() } else { &lo.num << shift };
    let (an, bn) = if b_is_hi { (lo_num, hi.num.clone()) } else { (hi.num.clone(), lo_num) };
    let num = if negate_b { an - bn } else { an + bn };
    Dyadic::new(num, hi.exp)
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        add_ref(self, rhs, false)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        add_ref(self, rhs, true)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let sign = self.num.sign().cmp(&other.num.sign());
        if sign != Ordering::Equal {
            return sign;
        }
        if self.exp > other.exp {
            self.num.cmp(&(&other.num << (self.exp - other.exp)))
        } else {
            (&self.num << (other.exp - self.exp)).cmp(&other.num)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(text: &str, whole: &str) -> Result<BigInt, DyadicError> {
    let t = text.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(DyadicError::Malformed(whole.to_string()));
    }
    t.parse::<BigInt>().map_err(|_| DyadicError::Malformed(whole.to_string()))
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text.trim();
        match trimmed.split_once('/') {
            None => Ok(Dyadic::new(parse_int(trimmed, text)?, 0)),
            Some((n, d)) => {
                let num = parse_int(n, text)?;
                if d.trim().starts_with(['-', '+']) {
                    return Err(DyadicError::Malformed(text.to_string()));
                }
                let den = parse_int(d, text)?;
                if den.is_zero() {
                    return Err(DyadicError::Malformed(text.to_string()));
                }
                let tz = den.trailing_zeros().unwrap_or(0);
                if !(&den >> tz).is_one() {
                    return Err(DyadicError::NotDyadic(text.to_string()));
                }
                Ok(Dyadic::new(num, tz))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

/// Integer floor of a dyadic value.
pub fn floor(d: &Dyadic) -> BigInt {
    if d.exp == 0 {
        d.num.clone()
    } else {
        d.num.div_floor(&(BigInt::one() << d.exp))
    }
}
