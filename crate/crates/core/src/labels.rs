//! Labelled trees: node `v` carrying `(i, η)` asks for `η` more weight on
//! object `i` whenever the oracle extends `v`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dyadic::Dyadic;
use crate::error::LoadError;
use crate::node::Node;
use crate::path::PathApprox;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub object: u64,
    pub eta: Dyadic,
}

/// At most one label per node, and labels along any path sum to at most 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelledTree {
    labels: BTreeMap<Node, Label>,
}

impl LabelledTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tree and checks both invariants.
    pub fn from_labels(labels: impl IntoIterator<Item = (Node, Label)>) -> Result<Self, LoadError> {
        let mut tree = Self::new();
        for (node, label) in labels {
            if label.eta.is_zero() {
                return Err(LoadError::Value(format!("zero label at {node}")));
            }
            if tree.labels.insert(node.clone(), label).is_some() {
                return Err(LoadError::Inconsistent(format!("two labels at node {node}")));
            }
        }
        let worst = tree.max_path_sum();
        if worst > Dyadic::one() {
            return Err(LoadError::Inconsistent(format!(
                "labels along some path sum to {worst} > 1"
            )));
        }
        Ok(tree)
    }

    pub fn get(&self, node: &Node) -> Option<&Label> {
        self.labels.get(node)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Node, &Label)> {
        self.labels.iter()
    }

    /// Labelled nodes extending `root` that lie on the current path, in
    /// lexicographic order.
    pub fn on_path<'a>(
        &'a self,
        root: &'a Node,
        path: &'a PathApprox,
    ) -> impl Iterator<Item = (&'a Node, &'a Label)> + 'a {
        self.labels
            .range(root.clone()..)
            .take_while(move |(v, _)| root.is_prefix_of(v))
            .filter(move |(v, _)| path.extends(v))
    }

    /// Labelled nodes strictly extending `v`.
    pub fn descendants<'a>(&'a self, v: &'a Node) -> impl Iterator<Item = (&'a Node, &'a Label)> + 'a {
        self.labels
            .range(v.clone()..)
            .take_while(move |(w, _)| v.is_prefix_of(w))
            .filter(move |(w, _)| w.len() > v.len())
    }

    /// Sum of labels at prefixes of `v` (including `v`) per object.
    pub fn totals_along(&self, v: &Node) -> BTreeMap<u64, Dyadic> {
        let mut out: BTreeMap<u64, Dyadic> = BTreeMap::new();
        for (w, label) in &self.labels {
            if w.is_prefix_of(v) {
                *out.entry(label.object).or_insert_with(Dyadic::zero) += &label.eta;
            }
        }
        out
    }

    /// Sum of labels at proper prefixes of `v`.
    fn above(&self, v: &Node) -> Dyadic {
        (0..v.len())
            .filter_map(|n| self.labels.get(&v.prefix(n)))
            .map(|l| &l.eta)
            .sum()
    }

    /// Largest label sum along a path, over all paths.
    pub fn max_path_sum(&self) -> Dyadic {
        Self::max_chain(self.labels.iter())
    }

    /// Largest label sum along a path through the strict descendants of `v`.
    fn max_below(&self, v: &Node) -> Dyadic {
        Self::max_chain(self.descendants(v))
    }

    /// In lexicographic order every node follows its prefixes, so a stack
    /// of ancestors gives all chain sums in one pass.
    fn max_chain<'a>(items: impl Iterator<Item = (&'a Node, &'a Label)>) -> Dyadic {
        let mut stack: Vec<(&Node, Dyadic)> = Vec::new();
        let mut best = Dyadic::zero();
        for (v, label) in items {
            while stack.last().is_some_and(|(u, _)| !u.is_prefix_of(v)) {
                stack.pop();
            }
            let sum = stack.last().map_or(Dyadic::zero(), |(_, s)| s.clone()) + label.eta.clone();
            if sum > best {
                best = sum.clone();
            }
            stack.push((v, sum));
        }
        best
    }

    /// Places a request so that every path through `v` gains exactly
    /// `min(η, 1 - current path sum)` on `object`.
    fn place(&mut self, v: Node, object: u64, eta: &Dyadic) {
        let anc = self.above(&v);
        let labelled = self.labels.contains_key(&v);
        let below = self.max_below(&v);
        let has_descendants = self.descendants(&v).next().is_some();
        if !labelled && &(&anc + eta) + &below <= Dyadic::one() {
            self.labels.insert(
                v,
                Label {
                    object,
                    eta: eta.clone(),
                },
            );
            return;
        }
        if !has_descendants && !labelled {
            let room = Dyadic::one().saturating_sub(&anc);
            if !room.is_zero() {
                self.labels.insert(v, Label { object, eta: room });
            }
            return;
        }
        self.place(v.child(false), object, eta);
        self.place(v.child(true), object, eta);
    }

    /// One label per line: `node object mantissa exponent`.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut labels = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| LoadError::Syntax {
                line: no + 1,
                message: what.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [node, object, mantissa, exponent] = fields[..] else {
                return Err(bad("expected `node object mantissa exponent`"));
            };
            let node: Node = node.parse().map_err(|_| bad("bad node"))?;
            let object = object.parse().map_err(|_| bad("bad object id"))?;
            let exponent = exponent.parse().map_err(|_| bad("bad exponent"))?;
            let eta = Dyadic::from_pair(mantissa, exponent).map_err(|_| bad("bad mantissa"))?;
            labels.push((node, Label { object, eta }));
        }
        Self::from_labels(labels)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, label) in &self.labels {
            let (m, e) = label.eta.to_pair();
            out.push_str(&format!("{v} {} {m} {e}\n", label.object));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub prefix: Node,
    pub object: u64,
    pub eta: Dyadic,
    pub stamp: u64,
}

/// An oracle machine generating a discrete semimeasure: request `(i, η)`
/// fires at step `stamp` for every oracle extending `prefix`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemimeasureMachine {
    requests: Vec<Request>,
}

impl SemimeasureMachine {
    pub fn new(mut requests: Vec<Request>) -> Result<Self, LoadError> {
        for r in &requests {
            if r.eta.is_zero() || r.eta > Dyadic::one() {
                return Err(LoadError::Value(format!(
                    "request at {} must lie in (0, 1], got {}",
                    r.prefix, r.eta
                )));
            }
        }
        // emission order: stamp, then shortlex prefix, then file order
        requests.sort_by(|a, b| {
            a.stamp
                .cmp(&b.stamp)
                .then(a.prefix.len().cmp(&b.prefix.len()))
                .then(a.prefix.cmp(&b.prefix))
        });
        Ok(Self { requests })
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    /// One request per line: `prefix object mantissa exponent stamp`.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut requests = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| LoadError::Syntax {
                line: no + 1,
                message: what.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [prefix, object, mantissa, exponent, stamp] = fields[..] else {
                return Err(bad("expected `prefix object mantissa exponent stamp`"));
            };
            requests.push(Request {
                prefix: prefix.parse().map_err(|_| bad("bad prefix"))?,
                object: object.parse().map_err(|_| bad("bad object id"))?,
                eta: Dyadic::from_pair(mantissa, exponent.parse().map_err(|_| bad("bad exponent"))?)
                    .map_err(|_| bad("bad mantissa"))?,
                stamp: stamp.parse().map_err(|_| bad("bad stamp"))?,
            });
        }
        Self::new(requests)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        Self::parse(&text)
    }

    /// Requests visible within `steps` steps and `depth` oracle bits.
    fn visible(&self, depth: u64, steps: u64) -> impl Iterator<Item = &Request> {
        self.requests
            .iter()
            .filter(move |r| r.stamp <= steps && r.prefix.len() <= depth)
    }

    /// Emissions on the oracle prefix `u`, trimmed so that the running
    /// total never exceeds 1. Requests reading beyond `u` are not visible.
    pub fn simulate(&self, u: &Node, steps: u64) -> Vec<(u64, Dyadic)> {
        let mut total = Dyadic::zero();
        let mut out = Vec::new();
        for r in self.visible(u.len(), steps) {
            if !r.prefix.is_prefix_of(u) {
                continue;
            }
            let room = Dyadic::one().saturating_sub(&total);
            let got = r.eta.clone().min(room.clone());
            if got.is_zero() {
                continue;
            }
            total += &got;
            out.push((r.object, got));
        }
        out
    }

    pub fn totals(&self, u: &Node, steps: u64) -> BTreeMap<u64, Dyadic> {
        let mut out: BTreeMap<u64, Dyadic> = BTreeMap::new();
        for (i, eta) in self.simulate(u, steps) {
            *out.entry(i).or_insert_with(Dyadic::zero) += &eta;
        }
        out
    }
}

/// Converts the machine's requests (up to `depth` oracle bits and `steps`
/// steps) into a labelled tree with the same per-path totals.
///
/// A request lands on its own prefix when that node is free and the extra
/// weight fits under 1 on every path through it. Otherwise it is pushed to
/// both children, and on label-free subtrees it is trimmed to the room
/// left.
pub fn machine_to_labels(machine: &SemimeasureMachine, depth: u64, steps: u64) -> LabelledTree {
    let mut tree = LabelledTree::new();
    for r in machine.visible(depth, steps) {
        tree.place(r.prefix.clone(), r.object, &r.eta);
    }
    tree
}
