//! The opponent's current approximation of an infinite binary sequence.

use std::collections::{BTreeMap, BTreeSet};

use crate::node::Node;

/// Bits default to zero; only finitely many are ever flipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathApprox {
    ones: BTreeSet<u64>,
    changes: BTreeMap<u64, u64>,
    last_change: BTreeMap<u64, u64>,
}

impl PathApprox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.ones.contains(&i)
    }

    pub fn flip(&mut self, step: u64, i: u64) {
        if !self.ones.remove(&i) {
            self.ones.insert(i);
        }
        *self.changes.entry(i).or_default() += 1;
        self.last_change.insert(i, step);
    }

    pub fn set(&mut self, step: u64, i: u64, value: bool) {
        if self.bit(i) != value {
            self.flip(step, i);
        }
    }

    pub fn changes(&self, i: u64) -> u64 {
        self.changes.get(&i).copied().unwrap_or(0)
    }

    pub fn ones(&self) -> &BTreeSet<u64> {
        &self.ones
    }

    pub fn prefix(&self, n: u64) -> Node {
        Node::from_ones(n, self.ones.range(..n).copied())
    }

    /// Whether `x` is a prefix of the current sequence.
    pub fn extends(&self, x: &Node) -> bool {
        let here: Vec<u64> = self.ones.range(..x.len()).copied().collect();
        here == x.ones()
    }

    /// Earliest step after which no bit below `n` changed.
    pub fn stable_since(&self, n: u64) -> u64 {
        self.last_change.range(..n).map(|(_, &s)| s + 1).max().unwrap_or(0)
    }

    /// Earliest step after which no bit at all changed.
    pub fn stable_since_all(&self) -> u64 {
        self.last_change.values().map(|s| s + 1).max().unwrap_or(0)
    }

    /// Largest index ever flipped, plus one.
    pub fn touched_len(&self) -> u64 {
        self.changes.keys().next_back().map_or(0, |i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_twice_counts_two() {
        let mut p = PathApprox::new();
        p.flip(1, 5);
        p.flip(3, 5);
        assert_eq!(p.changes(5), 2);
        assert!(!p.bit(5));
        assert_eq!(p.stable_since(6), 4);
        assert_eq!(p.stable_since(5), 0);
    }

    #[test]
    fn prefix_and_extends() {
        let mut p = PathApprox::new();
        p.flip(0, 1);
        p.flip(0, 4);
        assert_eq!(p.prefix(3).to_string(), "010");
        assert!(p.extends(&"01001".parse().unwrap()));
        assert!(!p.extends(&"011".parse().unwrap()));
        assert_eq!(p.touched_len(), 5);
    }
}
