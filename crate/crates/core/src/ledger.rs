//! Monotone weight ledgers with a hard budget.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LedgerKind {
    Lengths,
    Nodes,
    Objects,
}

impl fmt::Display for LedgerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LedgerKind::Lengths => "lengths",
            LedgerKind::Nodes => "nodes",
            LedgerKind::Objects => "objects",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} ledger: total {total} + {delta} exceeds budget {budget}")]
pub struct BudgetExceeded {
    pub kind: LedgerKind,
    pub total: Dyadic,
    pub delta: Dyadic,
    pub budget: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry<K> {
    pub step: u64,
    pub key: K,
    pub delta: Dyadic,
}

/// `key -> weight`, where weights only grow and their sum stays within the
/// budget. Every increase is logged together with the step it happened at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightLedger<K: Ord> {
    kind: LedgerKind,
    entries: BTreeMap<K, Dyadic>,
    total: Dyadic,
    budget: Dyadic,
    log: Vec<LedgerEntry<K>>,
}

impl<K: Ord + Clone> WeightLedger<K> {
    pub fn new(kind: LedgerKind, budget: Dyadic) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
            total: Dyadic::zero(),
            budget,
            log: Vec::new(),
        }
    }

    pub fn kind(&self) -> LedgerKind {
        self.kind
    }

    pub fn total(&self) -> &Dyadic {
        &self.total
    }

    pub fn budget(&self) -> &Dyadic {
        &self.budget
    }

    pub fn headroom(&self) -> Dyadic {
        self.budget.saturating_sub(&self.total)
    }

    pub fn get(&self, key: &K) -> Dyadic {
        self.entries.get(key).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn entries(&self) -> &BTreeMap<K, Dyadic> {
        &self.entries
    }

    pub fn log(&self) -> &[LedgerEntry<K>] {
        &self.log
    }

    pub fn would_fit(&self, delta: &Dyadic) -> bool {
        &self.total + delta <= self.budget
    }

    pub fn increase(&mut self, step: u64, key: K, delta: Dyadic) -> Result<(), BudgetExceeded> {
        let total = &self.total + &delta;
        if total > self.budget {
            return Err(BudgetExceeded {
                kind: self.kind,
                total: self.total.clone(),
                delta,
                budget: self.budget.clone(),
            });
        }
        if delta.is_zero() {
            return Ok(());
        }
        self.total = total;
        *self.entries.entry(key.clone()).or_insert_with(Dyadic::zero) += &delta;
        self.log.push(LedgerEntry { step, key, delta });
        Ok(())
    }

    /// Sum of the entries whose keys satisfy `pred`.
    pub fn sum_where(&self, mut pred: impl FnMut(&K) -> bool) -> Dyadic {
        self.entries.iter().filter(|(k, _)| pred(k)).map(|(_, v)| v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    #[test]
    fn single_increase() {
        let mut l = WeightLedger::new(LedgerKind::Lengths, Dyadic::one());
        l.increase(0, 3u64, Dyadic::pow2_neg(3)).unwrap();
        assert_eq!(l.total(), &Dyadic::pow2_neg(3));
        assert_eq!(l.get(&3), Dyadic::pow2_neg(3));
        assert_eq!(l.log().len(), 1);
    }

    #[test]
    fn budget_boundary() {
        let mut l = WeightLedger::new(LedgerKind::Nodes, Dyadic::one());
        l.increase(0, 0u64, Dyadic::one()).unwrap();
        let err = l.increase(1, 5, Dyadic::pow2_neg(1)).unwrap_err();
        assert_eq!(err.kind, LedgerKind::Nodes);
        assert_eq!(l.total(), &Dyadic::one());
        assert_eq!(l.log().len(), 1);
    }

    proptest! {
        #[test]
        fn total_is_exact_sum(raw in proptest::collection::vec((0u64..16, 0u64..64), 100)) {
            // 100 increases of m/2^13 with m < 64 stay below 1
            let mut l = WeightLedger::new(LedgerKind::Objects, Dyadic::one());
            let mut oracle = 0u64;
            for (step, (key, m)) in raw.iter().enumerate() {
                l.increase(step as u64, *key, Dyadic::from_parts(*m, 13)).unwrap();
                oracle += m;
            }
            prop_assert_eq!(l.total(), &Dyadic::new(BigUint::from(oracle), 13));
            let resummed: Dyadic = l.entries().values().sum();
            prop_assert_eq!(&resummed, l.total());
        }
    }
}
