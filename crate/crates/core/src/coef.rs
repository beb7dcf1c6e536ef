//! Declared game constants such as `c = 1.9` or `k = 2.4`.
//!
//! These are arbitrary positive rationals rather than dyadics, so they live
//! apart from the weights they scale.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::dyadic::{format_ratio, parse_rational, Dyadic, DyadicError};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coef(BigRational);

impl Coef {
    pub fn new(r: BigRational) -> Option<Self> {
        r.is_positive().then_some(Self(r))
    }

    pub fn from_dyadic(d: &Dyadic) -> Option<Self> {
        Self::new(d.to_ratio())
    }

    pub fn from_int(n: u64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    /// `self - 1/2`, the constant used for recursive calls.
    pub fn minus_half(&self) -> Option<Coef> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        Self::new(&self.0 - half)
    }

    pub fn lt_int(&self, n: i64) -> bool {
        self.0 < BigRational::from_integer(BigInt::from(n))
    }

    /// `self · d` as an exact rational.
    pub fn times(&self, d: &Dyadic) -> BigRational {
        &self.0 * d.to_ratio()
    }

    /// Compares `d` against `self · scale`.
    pub fn cmp_scaled(&self, d: &Dyadic, scale: &Dyadic) -> Ordering {
        d.to_ratio().cmp(&self.times(scale))
    }

    pub fn to_dyadic(&self) -> Result<Dyadic, DyadicError> {
        Dyadic::from_ratio(&self.0)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(&self.0))
    }
}

impl fmt::Debug for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coef({self})")
    }
}

impl FromStr for Coef {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s)
            .and_then(Coef::new)
            .ok_or_else(|| DyadicError::Parse(s.to_string()))
    }
}
