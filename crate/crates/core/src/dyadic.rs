//! Exact nonnegative dyadic rationals.
//!
//! A [`Dyadic`] is `mantissa * 2^-exponent` with an arbitrary precision
//! mantissa. Values are always kept canonical: the mantissa is odd, or the
//! value is zero with exponent zero. Equality is therefore structural.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("dyadic underflow: {minuend} - {subtrahend} is negative")]
    Underflow { minuend: String, subtrahend: String },
    #[error("not a dyadic rational: {0:?}")]
    Parse(String),
    #[error("value is not representable as a dyadic rational: {0}")]
    NotDyadic(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: BigUint,
    exponent: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: u64) -> Self {
        Self::new(BigUint::from(n), 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self {
            mantissa: BigUint::one(),
            exponent: k,
        }
    }

    /// Builds `mantissa * 2^-exponent` and reduces it to canonical form.
    pub fn new(mantissa: BigUint, exponent: u32) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(exponent));
        Self {
            mantissa: mantissa >> shift,
            exponent: exponent - shift as u32,
        }
    }

    pub fn from_parts(mantissa: u64, exponent: u32) -> Self {
        Self::new(BigUint::from(mantissa), exponent)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    fn aligned(&self, exponent: u32) -> BigUint {
        &self.mantissa << (exponent - self.exponent)
    }

    pub fn checked_sub(&self, other: &Dyadic) -> Result<Dyadic, DyadicError> {
        let e = self.exponent.max(other.exponent);
        let a = self.aligned(e);
        let b = other.aligned(e);
        if a < b {
            return Err(DyadicError::Underflow {
                minuend: self.to_string(),
                subtrahend: other.to_string(),
            });
        }
        Ok(Self::new(a - b, e))
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(&self, other: &Dyadic) -> Dyadic {
        self.checked_sub(other).unwrap_or_default()
    }

    pub fn min<'a>(&'a self, other: &'a Dyadic) -> &'a Dyadic {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max<'a>(&'a self, other: &'a Dyadic) -> &'a Dyadic {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn halve(&self) -> Dyadic {
        self.scale2(-1)
    }

    /// Multiplies by `2^k`.
    pub fn scale2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Self::zero();
        }
        let e = i64::from(self.exponent) - k;
        if e >= 0 {
            Self {
                mantissa: self.mantissa.clone(),
                exponent: u32::try_from(e).expect("dyadic exponent overflow"),
            }
        } else {
            Self {
                mantissa: &self.mantissa << (-e) as u64,
                exponent: 0,
            }
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.mantissa.clone()),
            BigInt::from(BigUint::one() << self.exponent),
        )
    }

    /// Exact conversion from a rational; fails when the reduced denominator is
    /// not a power of two or the value is negative.
    pub fn from_ratio(r: &BigRational) -> Result<Dyadic, DyadicError> {
        if r.is_negative() {
            return Err(DyadicError::NotDyadic(r.to_string()));
        }
        let den = r.denom().magnitude();
        if !is_power_of_two(den) {
            return Err(DyadicError::NotDyadic(r.to_string()));
        }
        let exponent = den.trailing_zeros().unwrap_or(0) as u32;
        Ok(Self::new(r.numer().magnitude().clone(), exponent))
    }

    /// Largest power of two (possibly `2^0 = 1` or larger) that is `<= r`.
    /// Returns `None` for `r <= 0`.
    pub fn floor_pow2(r: &BigRational) -> Option<Dyadic> {
        if !r.is_positive() {
            return None;
        }
        let num = r.numer().magnitude();
        let den = r.denom().magnitude();
        // candidate exponent from bit lengths, then correct by at most one
        let mut k = num.bits() as i64 - den.bits() as i64;
        let fits = |k: i64| -> bool {
            if k >= 0 {
                (den << k as u64) <= *num
            } else {
                *den <= (num << (-k) as u64)
            }
        };
        while !fits(k) {
            k -= 1;
        }
        while fits(k + 1) {
            k += 1;
        }
        Some(Dyadic::one().scale2(k))
    }

    /// Lossy, for human-facing output only.
    pub fn to_f64(&self) -> f64 {
        let m = self.mantissa.to_f64().unwrap_or(f64::INFINITY);
        m * 2f64.powi(-(self.exponent.min(i32::MAX as u32) as i32))
    }

    /// `(mantissa decimal string, exponent)`.
    pub fn to_pair(&self) -> (String, u32) {
        (self.mantissa.to_str_radix(10), self.exponent)
    }

    pub fn from_pair(mantissa: &str, exponent: u32) -> Result<Dyadic, DyadicError> {
        let m = BigUint::parse_bytes(mantissa.as_bytes(), 10)
            .filter(|_| !mantissa.is_empty() && mantissa.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| DyadicError::Parse(mantissa.to_string()))?;
        let d = Dyadic::new(m, exponent);
        Ok(d)
    }

    /// Parses the pair form and insists it was already canonical.
    pub fn from_canonical_pair(mantissa: &str, exponent: u32) -> Result<Dyadic, DyadicError> {
        let d = Self::from_pair(mantissa, exponent)?;
        if d.to_pair() != (mantissa.to_string(), exponent) {
            return Err(DyadicError::Parse(format!("{mantissa}:{exponent} is not canonical")));
        }
        Ok(d)
    }
}

fn is_power_of_two(n: &BigUint) -> bool {
    !n.is_zero() && n.count_ones() == 1
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.aligned(e).cmp(&other.aligned(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(self.aligned(e) + rhs.aligned(e), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd, so this is already canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self
                .exponent
                .checked_add(rhs.exponent)
                .expect("dyadic exponent overflow"),
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, d| &acc + d)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, d| &acc + &d)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/{}", self.mantissa, BigUint::one() << self.exponent)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Accepts `7`, `3/4`, `0.375`, and the pair form `3:2` (= 3·2^-2).
impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || DyadicError::Parse(s.to_string());
        if let Some((m, e)) = s.split_once(':') {
            let e: u32 = e.parse().map_err(|_| bad())?;
            return Dyadic::from_pair(m, e);
        }
        let r = parse_rational(s).ok_or_else(bad)?;
        Dyadic::from_ratio(&r)
    }
}

/// Parses `p`, `p/q` or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().ok()?;
        let mut numer = int_part.abs() * &scale + frac_part;
        if neg {
            numer = -numer;
        }
        return Some(BigRational::new(numer, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Prints a rational as `p/q` (or `p` when integral).
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_pair().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (m, e): (String, u32) = Deserialize::deserialize(d)?;
        Dyadic::from_canonical_pair(&m, e).map_err(D::Error::custom)
    }
}

/// `ceil(log2(n))`, and zero for `n <= 1`.
pub(crate) fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
