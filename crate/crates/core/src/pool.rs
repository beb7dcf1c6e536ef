//! Infinite arithmetic progressions of lengths (or points) that strategies
//! carve up among their sub-processes.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("pool stride must be positive")]
    ZeroStride,
    #[error("pool arithmetic overflowed u64")]
    Overflow,
    #[error("malformed pool {0:?}, expected `offset+stride*k`")]
    Parse(String),
}

/// The progression `offset, offset + stride, offset + 2·stride, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LengthPool {
    offset: u64,
    stride: u64,
}

impl LengthPool {
    pub fn new(offset: u64, stride: u64) -> Result<Self, PoolError> {
        if stride == 0 {
            return Err(PoolError::ZeroStride);
        }
        Ok(Self { offset, stride })
    }

    /// All natural numbers.
    pub fn naturals() -> Self {
        Self { offset: 0, stride: 1 }
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.offset && (x - self.offset).is_multiple_of(self.stride)
    }

    /// The `i`-th member, counting from zero.
    pub fn nth(&self, i: u64) -> Option<u64> {
        i.checked_mul(self.stride)?.checked_add(self.offset)
    }

    /// Index of `x` inside the pool, if it is a member.
    pub fn index_of(&self, x: u64) -> Option<u64> {
        self.contains(x).then(|| (x - self.offset) / self.stride)
    }

    /// Smallest member `>= x`.
    pub fn first_at_least(&self, x: u64) -> Option<u64> {
        if x <= self.offset {
            return Some(self.offset);
        }
        let i = (x - self.offset).div_ceil(self.stride);
        self.nth(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..).map_while(|i| self.nth(i))
    }

    /// Sub-progression picking indices `t ≡ r (mod q)`.
    fn sub(&self, r: u64, q: u64) -> Result<LengthPool, PoolError> {
        let offset = r
            .checked_mul(self.stride)
            .and_then(|d| d.checked_add(self.offset))
            .ok_or(PoolError::Overflow)?;
        let stride = q.checked_mul(self.stride).ok_or(PoolError::Overflow)?;
        Ok(LengthPool { offset, stride })
    }

    /// Splits into `parts` residue classes of the index.
    pub fn split(&self, parts: u64) -> Result<Vec<LengthPool>, PoolError> {
        assert!(parts >= 1, "cannot split into zero parts");
        (0..parts).map(|r| self.sub(r, parts)).collect()
    }

    /// Part `k >= 1` of the countable split by the 2-adic valuation of the
    /// one-based index: `{1,2,3,...}` gives odd, 2·odd, 4·odd, ...
    pub fn countable_part(&self, k: u32) -> Result<LengthPool, PoolError> {
        assert!(k >= 1, "countable parts are numbered from 1");
        if k >= 63 {
            return Err(PoolError::Overflow);
        }
        self.sub((1u64 << (k - 1)) - 1, 1u64 << k)
    }

    /// Part `n >= 1` of a countable split whose strides grow only
    /// polynomially in `n`.
    ///
    /// Index `t` belongs to part `n` when the Elias gamma codeword of `n` is
    /// a prefix of the binary digits of `t + 1` read least significant
    /// first. Gamma codewords form a complete prefix-free code, so the parts
    /// are disjoint and cover the pool. Part `n` has stride factor
    /// `2^(2·floor(log2 n) + 1)`.
    pub fn gamma_part(&self, n: u64) -> Result<LengthPool, PoolError> {
        assert!(n >= 1, "gamma parts are numbered from 1");
        let b = 63 - n.leading_zeros();
        let width = 2 * b + 1;
        if width >= 64 {
            return Err(PoolError::Overflow);
        }
        // the codeword is b zeros then n most-significant bit first
        let reversed = n.reverse_bits() >> (63 - b);
        let residue = (reversed << b) - 1;
        self.sub(residue, 1u64 << width)
    }

    /// Whether the two progressions share a member.
    pub fn intersects(&self, other: &LengthPool) -> bool {
        let g = self.stride.gcd(&other.stride);
        self.offset % g == other.offset % g
    }

    pub fn is_subpool_of(&self, parent: &LengthPool) -> bool {
        parent.contains(self.offset) && self.stride.is_multiple_of(parent.stride)
    }
}

impl fmt::Display for LengthPool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*k", self.offset, self.stride)
    }
}

impl FromStr for LengthPool {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PoolError::Parse(s.to_string());
        let body = s.trim().strip_suffix("*k").ok_or_else(bad)?;
        let (offset, stride) = body.split_once('+').ok_or_else(bad)?;
        let offset = offset.trim().parse().map_err(|_| bad())?;
        let stride = stride.trim().parse().map_err(|_| bad())?;
        LengthPool::new(offset, stride)
    }
}
