use std::collections::BTreeSet;
use std::fmt;

use crate::dyadic::Dyadic;
use crate::node::Node;

use super::CoveringError;

/// A finite union of cylinders `[u]`, kept as the unique antichain in
/// which no two members are siblings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    prefixes: Vec<Node>,
}

fn sibling(v: &Node) -> Node {
    let last = v.len() - 1;
    v.prefix(last).child(!v.bit(last))
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole space `[-]`.
    pub fn full() -> Self {
        Self {
            prefixes: vec![Node::root()],
        }
    }

    /// Union of the given cylinders, normalized: members covered by a
    /// shorter member are dropped and sibling pairs merge into their
    /// parent until none remain.
    pub fn new(prefixes: impl IntoIterator<Item = Node>) -> Self {
        let mut set: BTreeSet<Node> = prefixes.into_iter().collect();
        loop {
            let mut kept: Vec<Node> = Vec::with_capacity(set.len());
            for v in set {
                // lexicographic order puts every prefix before its extensions
                if kept.last().is_some_and(|u| u.is_prefix_of(&v)) {
                    continue;
                }
                kept.push(v);
            }
            let members: BTreeSet<Node> = kept.iter().cloned().collect();
            let mut merged = BTreeSet::new();
            let mut changed = false;
            for v in &kept {
                if !v.is_root() && members.contains(&sibling(v)) {
                    merged.insert(v.prefix(v.len() - 1));
                    changed = true;
                } else {
                    merged.insert(v.clone());
                }
            }
            set = merged;
            if !changed {
                return Self {
                    prefixes: set.into_iter().collect(),
                };
            }
        }
    }

    /// Members in lexicographic order.
    pub fn prefixes(&self) -> &[Node] {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn measure(&self) -> Dyadic {
        self.prefixes.iter().map(Node::cylinder_measure).sum()
    }

    /// Whether the sequence with prefix `x` is known to lie in the set.
    pub fn contains_prefix_of(&self, x: &Node) -> bool {
        self.member_prefix_of(x).is_some()
    }

    fn member_prefix_of(&self, x: &Node) -> Option<&Node> {
        (0..=x.len()).find_map(|n| {
            let p = x.prefix(n);
            self.prefixes.binary_search(&p).ok().map(|i| &self.prefixes[i])
        })
    }

    /// Whether `[u]` lies entirely inside the set. Exact because the
    /// representation is normalized.
    pub fn covers(&self, u: &Node) -> bool {
        self.contains_prefix_of(u)
    }

    /// Measure of the part of the set inside `[u]`.
    pub fn measure_within(&self, u: &Node) -> Dyadic {
        if self.covers(u) {
            return u.cylinder_measure();
        }
        self.prefixes
            .iter()
            .filter(|w| u.is_prefix_of(w))
            .map(Node::cylinder_measure)
            .sum()
    }

    /// `V/u`: the sequences `α` with `uα` in the set.
    pub fn quotient(&self, u: &Node) -> IntervalSet {
        if self.covers(u) {
            return Self::full();
        }
        Self::new(self.prefixes.iter().filter_map(|w| w.strip_prefix(u)))
    }

    /// Splits `x` into consecutive members, reading left to right. Members
    /// form an antichain, so at most one can start at any position and the
    /// split is unique. `Err(p)` gives the first position where no member
    /// fits.
    pub fn decompose_tail(&self, x: &Node) -> Result<Vec<Node>, u64> {
        if self.prefixes.first().is_some_and(Node::is_root) {
            // the empty piece makes no progress
            return if x.is_empty() { Ok(Vec::new()) } else { Err(0) };
        }
        let mut pieces = Vec::new();
        let mut pos = 0;
        while pos < x.len() {
            let rest = x.strip_prefix(&x.prefix(pos)).expect("prefix of itself");
            match self.member_prefix_of(&rest) {
                Some(u) => {
                    pos += u.len();
                    pieces.push(u.clone());
                }
                None => return Err(pos),
            }
        }
        Ok(pieces)
    }

    /// `ρ^n` where `ρ` is the measure: the measure of the sequences that
    /// start with `n` consecutive members.
    pub fn iterated_measure(&self, n: u32) -> Dyadic {
        let rho = self.measure();
        (0..n).fold(Dyadic::one(), |acc, _| &acc * &rho)
    }

    /// Smallest `n` with `ρ^n < 2^-t`; `None` when `ρ = 1`.
    pub fn power_below(&self, t: u32) -> Option<u32> {
        let rho = self.measure();
        if rho >= Dyadic::one() {
            return None;
        }
        let bound = Dyadic::pow2_neg(t);
        let mut acc = Dyadic::one();
        let mut n = 0;
        while acc >= bound {
            acc = &acc * &rho;
            n += 1;
        }
        Some(n)
    }

    /// One prefix per line, `-` for the empty string; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CoveringError> {
        let mut prefixes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            prefixes.push(line.parse().map_err(|_| CoveringError::Syntax {
                line: i + 1,
                message: format!("bad prefix {line:?}"),
            })?);
        }
        Ok(Self::new(prefixes))
    }

    pub fn to_text(&self) -> String {
        self.prefixes.iter().map(|p| format!("{p}\n")).collect()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.prefixes.iter().map(Node::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Result of [`escape_sequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Escape {
    /// Chosen members `u_i, u_j, ...` in order.
    pub pieces: Vec<Node>,
    /// Round at which every member was already covered.
    pub obstruction: Option<usize>,
}

impl Escape {
    pub fn concatenation(&self) -> Node {
        self.pieces.iter().fold(Node::root(), |acc, p| acc.concat(p))
    }
}

/// Builds `u_i u_j u_k ...` one member at a time, each time taking the
/// first member of `u` whose cylinder the current `V` does not cover and
/// replacing `V` by its quotient.
pub fn escape_sequence(u: &IntervalSet, v: &IntervalSet, rounds: usize) -> Escape {
    let mut current = v.clone();
    let mut pieces = Vec::new();
    for round in 0..rounds {
        let Some(next) = u.prefixes().iter().find(|p| !current.covers(p)) else {
            return Escape {
                pieces,
                obstruction: Some(round),
            };
        };
        current = current.quotient(next);
        pieces.push(next.clone());
    }
    Escape {
        pieces,
        obstruction: None,
    }
}
