//! Finite binary strings, i.e. nodes of the full binary tree.
//!
//! Nodes are stored sparsely as a length plus the sorted positions of their
//! one-bits. Game paths have finitely many ones, while the lengths the
//! strategies work with can be very large, so a dense representation is
//! not an option.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dyadic::Dyadic;

/// Nodes longer than this are printed in the compact `len@p,q,...` form.
pub const DENSE_PRINT_LIMIT: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed node {0:?}")]
pub struct NodeParseError(pub String);

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Node {
    len: u64,
    ones: Vec<u64>,
}

impl Node {
    pub fn root() -> Self {
        Self::default()
    }

    /// Builds a node from its length and the positions of its one-bits.
    /// Positions must be `< len`; duplicates are ignored.
    pub fn from_ones(len: u64, ones: impl IntoIterator<Item = u64>) -> Self {
        let mut ones: Vec<u64> = ones.into_iter().collect();
        ones.sort_unstable();
        ones.dedup();
        assert!(
            ones.last().is_none_or(|&p| p < len),
            "one-bit position beyond node length"
        );
        Self { len, ones }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let ones = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u64)
            .collect();
        Self {
            len: bits.len() as u64,
            ones,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    pub fn is_empty(&self) -> bool {
        self.is_root()
    }

    pub fn ones(&self) -> &[u64] {
        &self.ones
    }

    pub fn bit(&self, i: u64) -> bool {
        assert!(i < self.len, "bit {i} out of range for node of length {}", self.len);
        self.ones.binary_search(&i).is_ok()
    }

    /// Dense bits; only sensible for short nodes.
    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    pub fn child(&self, bit: bool) -> Node {
        let mut ones = self.ones.clone();
        if bit {
            ones.push(self.len);
        }
        Node {
            len: self.len + 1,
            ones,
        }
    }

    /// The first `n` bits. Panics when `n > len`.
    pub fn prefix(&self, n: u64) -> Node {
        assert!(n <= self.len, "prefix {n} longer than node ({})", self.len);
        let cut = self.ones.partition_point(|&p| p < n);
        Node {
            len: n,
            ones: self.ones[..cut].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &Node) -> bool {
        if self.len > other.len {
            return false;
        }
        let cut = other.ones.partition_point(|&p| p < self.len);
        other.ones[..cut] == self.ones[..]
    }

    /// Neither is a prefix of the other.
    pub fn incomparable(&self, other: &Node) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    pub fn concat(&self, tail: &Node) -> Node {
        let mut ones = self.ones.clone();
        ones.extend(tail.ones.iter().map(|p| p + self.len));
        Node {
            len: self.len + tail.len,
            ones,
        }
    }

    /// `Some(t)` with `self = prefix · t` when `prefix` is a prefix of `self`.
    pub fn strip_prefix(&self, prefix: &Node) -> Option<Node> {
        if !prefix.is_prefix_of(self) {
            return None;
        }
        let cut = prefix.ones.len();
        Some(Node {
            len: self.len - prefix.len,
            ones: self.ones[cut..].iter().map(|p| p - prefix.len).collect(),
        })
    }

    /// Measure `2^-len` of the cylinder of sequences extending this node.
    pub fn cylinder_measure(&self) -> Dyadic {
        Dyadic::pow2_neg(u32::try_from(self.len).expect("node too long for a measure"))
    }

    /// Position in the shortlex enumeration `-, 0, 1, 00, 01, ...`.
    pub fn shortlex_index(&self) -> Option<u64> {
        if self.len >= 63 {
            return None;
        }
        let value = self.ones.iter().fold(0u64, |acc, &p| acc | (1 << (self.len - 1 - p)));
        Some((1u64 << self.len) - 1 + value)
    }

    /// All nodes of exactly `len` bits, in lexicographic order.
    pub fn all_of_length(len: u32) -> impl Iterator<Item = Node> {
        assert!(len < 40, "refusing to enumerate 2^{len} nodes");
        (0u64..1 << len).map(move |v| {
            let ones = (0..u64::from(len)).filter(|i| v >> (u64::from(len) - 1 - i) & 1 == 1);
            Node::from_ones(u64::from(len), ones)
        })
    }
}

impl Ord for Node {
    /// Lexicographic order on bit strings, a prefix sorting before its
    /// extensions.
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        let mut i = 0;
        loop {
            let a = self.ones.get(i).copied().filter(|&p| p < common);
            let b = other.ones.get(i).copied().filter(|&p| p < common);
            match (a, b) {
                (None, None) => return self.len.cmp(&other.len),
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(p), Some(q)) if p == q => i += 1,
                // the earlier one-bit faces a zero in the other string
                (Some(p), Some(q)) => return q.cmp(&p),
            }
        }
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("-");
        }
        if self.len <= DENSE_PRINT_LIMIT {
            let mut s = String::with_capacity(self.len as usize);
            let mut next = self.ones.iter().peekable();
            for i in 0..self.len {
                if next.peek() == Some(&&i) {
                    next.next();
                    s.push('1');
                } else {
                    s.push('0');
                }
            }
            return f.write_str(&s);
        }
        write!(f, "{}@", self.len)?;
        let ones: Vec<String> = self.ones.iter().map(u64::to_string).collect();
        f.write_str(&ones.join(","))
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Node({self})")
    }
}

/// Accepts `-` (or the empty string) for the root, a bit string, or the
/// compact form `len@p1,p2,...`.
impl FromStr for Node {
    type Err = NodeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || NodeParseError(s.to_string());
        if s.is_empty() || s == "-" {
            return Ok(Node::root());
        }
        if let Some((len, ones)) = s.split_once('@') {
            let len: u64 = len.parse().map_err(|_| bad())?;
            let ones: Vec<u64> = if ones.is_empty() {
                Vec::new()
            } else {
                ones.split(',')
                    .map(|p| p.parse().map_err(|_| bad()))
                    .collect::<Result<_, _>>()?
            };
            if ones.windows(2).any(|w| w[0] >= w[1]) || ones.last().is_some_and(|&p| p >= len) {
                return Err(bad());
            }
            return Ok(Node { len, ones });
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(bad()),
            }
        }
        Ok(Node::from_bits(&bits))
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
