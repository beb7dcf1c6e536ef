//! Shared arithmetic for the budgeted recursive processes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::coef::Coef;
use crate::dyadic::{ceil_log2, Dyadic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("constant {0} must be below 2 for the base strategy")]
    NotBelowTwo(Coef),
    #[error("constant {0} leaves no room for recursive calls")]
    NoRoom(Coef),
    #[error("pools of sub-strategies {0} and {1} overlap")]
    PoolOverlap(usize, usize),
    #[error("sub-strategy budgets sum to {0}, above 1")]
    OverBudget(Dyadic),
    #[error("{0}")]
    Config(String),
}

/// Largest power of two `ε` with `2 - 6ε >= c`.
pub fn epsilon_for(c: &Coef) -> Result<Dyadic, StrategyError> {
    let two = BigRational::from_integer(BigInt::from(2));
    let gap = (two - c.ratio()) / BigRational::from_integer(BigInt::from(6));
    Dyadic::floor_pow2(&gap).ok_or_else(|| StrategyError::NotBelowTwo(c.clone()))
}

/// Portion fraction `σ` for a process with constant `k` whose recursive
/// calls use `k' = k - 1/2`: the largest power of two not above
/// `(k' + 1 - k) / (k' + 1)`.
///
/// When the process stops, the opponent has matched the closed calls with
/// factor `k'` and must match everything once more on the final path;
/// what is lost is at most one open call per node, `σ` in total, so the
/// constructor insists on `(k'+1)(1 - σ/2) - k'σ >= k - σ`.
pub fn nested_sigma(k: &Coef) -> Result<Dyadic, StrategyError> {
    let kp = k.minus_half().ok_or_else(|| StrategyError::NoRoom(k.clone()))?;
    let one = BigRational::one();
    let kp1 = kp.ratio() + &one;
    let frac = (&kp1 - k.ratio()) / &kp1;
    let sigma = Dyadic::floor_pow2(&frac).ok_or_else(|| StrategyError::NoRoom(k.clone()))?;
    let s = sigma.to_ratio();
    let two = BigRational::from_integer(BigInt::from(2));
    let lhs = &kp1 * (&one - &s / &two) - kp.ratio() * &s;
    let rhs = k.ratio() - &s;
    if lhs < rhs {
        return Err(StrategyError::NoRoom(k.clone()));
    }
    Ok(sigma)
}

/// Size of the portion given to the `j`-th node a process discovers:
/// `α·σ·2^-ceil(log2((j+1)(j+2)))`. Summed over all `j` this stays below
/// `α·σ`.
pub fn portion(alpha: &Dyadic, sigma: &Dyadic, j: u64) -> Dyadic {
    let weight = (j + 1).saturating_mul(j + 2);
    let shift = ceil_log2(weight);
    (alpha * sigma).scale2(-i64::from(shift))
}
