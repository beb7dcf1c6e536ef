//! Our side of the lowness game.
//!
//! A process `S(c, x, α, L)` serves the labels above `x`. For `c < 2`
//! every labelled node `y` on the path gets a private length `l_y` that is
//! raised in portions, each one waiting for the opponent to match the
//! previous. When `l_y` reaches `α·ε·η` the object named by the label gets
//! the same weight. Just before the total would pass `α` the process stops.
//! For `c >= 2` each labelled node instead runs a sequence of calls
//! `S(c - 1/2, y, δ_y, L_y^s)`; a call that never stops while `y` stays on
//! the path delivers the objects alone.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::coef::Coef;
use crate::dyadic::Dyadic;
use crate::game::{Action, GameState, Note, Spawn, TaggedAction};
use crate::labels::LabelledTree;
use crate::node::Node;
use crate::pool::LengthPool;

use super::incompleteness::Status;
use super::portions::{epsilon_for, nested_sigma, portion, StrategyError};
use super::{Strategy, View};

#[derive(Debug, Clone)]
enum SlotKind {
    Base {
        length: u64,
        object: u64,
        target: Dyadic,
        placed: Dyadic,
    },
    Nested {
        calls: u64,
        current: Option<u64>,
        closed: Dyadic,
    },
}

#[derive(Debug, Clone)]
struct Slot {
    j: u64,
    delta: Dyadic,
    kind: SlotKind,
}

#[derive(Debug, Clone)]
pub struct ProcessS {
    pub id: u64,
    pub parent: Option<u64>,
    pub depth: u32,
    pub c: Coef,
    pub root: Node,
    pub alpha: Dyadic,
    pub lengths: LengthPool,
    pub status: Status,
    pub spent: Dyadic,
    pub objects: Dyadic,
    sigma: Dyadic,
    nested: bool,
    slots: BTreeMap<Node, Slot>,
    assigned: BTreeSet<u64>,
    announced: bool,
}

impl ProcessS {
    fn new(
        id: u64,
        parent: Option<u64>,
        depth: u32,
        c: Coef,
        root: Node,
        alpha: Dyadic,
        lengths: LengthPool,
    ) -> Result<Self, StrategyError> {
        let nested = !c.lt_int(2);
        let sigma = if nested { nested_sigma(&c)? } else { epsilon_for(&c)? };
        Ok(Self {
            id,
            parent,
            depth,
            c,
            root,
            alpha,
            lengths,
            status: Status::Live,
            spent: Dyadic::zero(),
            objects: Dyadic::zero(),
            sigma,
            nested,
            slots: BTreeMap::new(),
            assigned: BTreeSet::new(),
            announced: false,
        })
    }

    /// `ε` for a base process, the portion fraction `σ` otherwise.
    pub fn sigma(&self) -> &Dyadic {
        &self.sigma
    }

    pub fn is_nested(&self) -> bool {
        self.nested
    }

    fn spawn_note(&self) -> TaggedAction {
        Action::Note(Note::Spawn(Spawn {
            proc: self.id,
            parent: self.parent,
            root: self.root.clone(),
            budget: self.alpha.clone(),
            lengths: self.lengths,
            points: None,
            reserved: None,
            coef: self.c.to_string(),
            depth: self.depth,
        }))
        .by(self.id)
    }

    /// Smallest member of `L` not below `|y|` not yet handed out.
    fn fresh_length(&mut self, y: &Node) -> u64 {
        let mut l = self.lengths.first_at_least(y.len()).expect("length pool exhausted");
        while self.assigned.contains(&l) {
            l += self.lengths.stride();
        }
        self.assigned.insert(l);
        l
    }
}

/// A top-level lowness process with all its descendants.
#[derive(Debug, Clone)]
pub struct Lowness {
    procs: BTreeMap<u64, ProcessS>,
    top: u64,
    next_id: u64,
}

impl Lowness {
    /// `S(c, root, α, L)`. Process ids start at `id_base`.
    pub fn new(c: Coef, root: Node, alpha: Dyadic, lengths: LengthPool, id_base: u64) -> Result<Self, StrategyError> {
        let top = ProcessS::new(id_base, None, 0, c, root, alpha, lengths)?;
        let mut procs = BTreeMap::new();
        procs.insert(id_base, top);
        Ok(Self {
            procs,
            top: id_base,
            next_id: id_base + 1,
        })
    }

    /// The whole tree with budget 1 on all lengths.
    pub fn full(c: Coef) -> Result<Self, StrategyError> {
        Self::new(c, Node::root(), Dyadic::one(), LengthPool::naturals(), 0)
    }

    pub fn top(&self) -> &ProcessS {
        &self.procs[&self.top]
    }

    pub fn process(&self, id: u64) -> Option<&ProcessS> {
        self.procs.get(&id)
    }

    pub fn processes(&self) -> impl Iterator<Item = &ProcessS> {
        self.procs.values()
    }

    fn charge(&mut self, mut id: u64, length: &Dyadic, object: &Dyadic) {
        loop {
            let p = self.procs.get_mut(&id).expect("known process");
            p.spent += length;
            p.objects += object;
            match p.parent {
                Some(up) => id = up,
                None => break,
            }
        }
    }

    fn terminate_below(&mut self, id: u64, out: &mut Vec<TaggedAction>) {
        let children: Vec<u64> = self.procs[&id]
            .slots
            .values()
            .filter_map(|s| match s.kind {
                SlotKind::Nested { current, .. } => current,
                SlotKind::Base { .. } => None,
            })
            .collect();
        for c in children {
            if self.procs[&c].status == Status::Live {
                self.terminate_below(c, out);
                self.procs.get_mut(&c).expect("child").status = Status::Terminated;
                out.push(Action::Note(Note::Terminate { proc: c }).by(c));
            }
        }
    }

    fn halt(&mut self, id: u64, out: &mut Vec<TaggedAction>) {
        self.terminate_below(id, out);
        self.procs.get_mut(&id).expect("process").status = Status::Halted;
        out.push(Action::Note(Note::Halt { proc: id }).by(id));
    }

    /// Opens a slot for every labelled node above the root now on the path.
    fn discover(&mut self, id: u64, labels: &LabelledTree, state: &GameState) {
        let p = self.procs.get_mut(&id).expect("process");
        let root = p.root.clone();
        for (y, label) in labels.on_path(&root, &state.path) {
            if p.slots.contains_key(y) {
                continue;
            }
            let j = p.slots.len() as u64;
            let delta = portion(&p.alpha, &p.sigma, j);
            let kind = if p.nested {
                SlotKind::Nested {
                    calls: 0,
                    current: None,
                    closed: Dyadic::zero(),
                }
            } else {
                SlotKind::Base {
                    length: p.fresh_length(y),
                    object: label.object,
                    target: &(&p.alpha * &p.sigma) * &label.eta,
                    placed: Dyadic::zero(),
                }
            };
            p.slots.insert(y.clone(), Slot { j, delta, kind });
        }
    }

    fn step(&mut self, id: u64, labels: &LabelledTree, state: &GameState, out: &mut Vec<TaggedAction>) {
        {
            let p = &self.procs[&id];
            if p.status != Status::Live || !state.path.extends(&p.root) {
                return;
            }
        }
        if !self.procs[&id].announced {
            self.procs.get_mut(&id).expect("process").announced = true;
            out.push(self.procs[&id].spawn_note());
        }
        self.discover(id, labels, state);
        let awake: Vec<Node> = self.procs[&id]
            .slots
            .keys()
            .filter(|y| state.path.extends(y))
            .cloned()
            .collect();
        for y in awake {
            let stop = if self.procs[&id].nested {
                self.step_nested(id, &y, labels, state, out)
            } else {
                self.step_base(id, &y, state, out)
            };
            if stop {
                return;
            }
        }
    }

    /// Returns true when the process stopped.
    fn step_base(&mut self, id: u64, y: &Node, state: &GameState, out: &mut Vec<TaggedAction>) -> bool {
        let p = &self.procs[&id];
        let slot = &p.slots[y];
        let SlotKind::Base {
            length,
            object,
            target,
            placed,
        } = &slot.kind
        else {
            unreachable!("base process with nested slot")
        };
        if placed == target {
            return false;
        }
        let matched = placed.is_zero() || state.opponent_on_prefix(*length) > *placed;
        if !matched {
            return false;
        }
        let rest = target.checked_sub(placed).expect("placed stays below target");
        let delta = slot.delta.clone().min(rest);
        if &p.spent + &delta > p.alpha {
            self.halt(id, out);
            return true;
        }
        let (length, object) = (*length, *object);
        let mut reached = None;
        if let SlotKind::Base { placed, target, .. } = &mut self
            .procs
            .get_mut(&id)
            .expect("process")
            .slots
            .get_mut(y)
            .expect("slot")
            .kind
        {
            *placed += &delta;
            if placed == target {
                reached = Some(target.clone());
            }
        }
        out.push(
            Action::Length {
                length,
                delta: delta.clone(),
            }
            .by(id),
        );
        let gained = reached.clone().unwrap_or_else(Dyadic::zero);
        self.charge(id, &delta, &gained);
        if let Some(weight) = reached {
            out.push(Action::Object { object, delta: weight }.by(id));
        }
        false
    }

    fn step_nested(
        &mut self,
        id: u64,
        y: &Node,
        labels: &LabelledTree,
        state: &GameState,
        out: &mut Vec<TaggedAction>,
    ) -> bool {
        let current = match self.procs[&id].slots[y].kind {
            SlotKind::Nested { current, .. } => current,
            SlotKind::Base { .. } => unreachable!("nested process with base slot"),
        };
        if let Some(c) = current {
            self.step(c, labels, state, out);
            let child = &self.procs[&c];
            if child.status == Status::Live {
                return false;
            }
            let spent = child.spent.clone();
            if let SlotKind::Nested { current, closed, .. } = &mut self
                .procs
                .get_mut(&id)
                .expect("process")
                .slots
                .get_mut(y)
                .expect("slot")
                .kind
            {
                *closed += &spent;
                *current = None;
            }
        }
        let p = &self.procs[&id];
        let slot = &p.slots[y];
        if &self.committed(id) + &slot.delta > p.alpha {
            self.halt(id, out);
            return true;
        }
        let SlotKind::Nested { calls, .. } = slot.kind else {
            unreachable!()
        };
        let s = calls + 1;
        let lengths = p
            .lengths
            .gamma_part(slot.j + 1)
            .and_then(|l| l.gamma_part(s))
            .expect("length pool overflow");
        let c = p.c.minus_half().expect("nested constant above 1/2");
        let child_id = self.next_id;
        self.next_id += 1;
        let child = ProcessS::new(
            child_id,
            Some(id),
            p.depth + 1,
            c,
            y.clone(),
            slot.delta.clone(),
            lengths,
        )
        .expect("child constant validated by the parent");
        self.procs.insert(child_id, child);
        if let SlotKind::Nested { calls, current, .. } = &mut self
            .procs
            .get_mut(&id)
            .expect("process")
            .slots
            .get_mut(y)
            .expect("slot")
            .kind
        {
            *calls = s;
            *current = Some(child_id);
        }
        self.step(child_id, labels, state, out);
        false
    }

    fn committed(&self, id: u64) -> Dyadic {
        let mut total = Dyadic::zero();
        for slot in self.procs[&id].slots.values() {
            if let SlotKind::Nested { current, closed, .. } = &slot.kind {
                total += closed;
                if current.is_some() {
                    total += &slot.delta;
                }
            }
        }
        total
    }
}

impl Strategy for Lowness {
    fn name(&self) -> String {
        format!("lowness(c={})", self.top().c)
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let Some(labels) = view.variant.labels().map(Arc::clone) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        self.step(self.top, &labels, view.state, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{apply_move, Move, Player, Variant};
    use crate::labels::Label;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn variant(labels: &[(&str, u64, &str)]) -> Variant {
        let tree = LabelledTree::from_labels(
            labels
                .iter()
                .map(|(n, i, e)| (n.parse().unwrap(), Label { object: *i, eta: d(e) })),
        )
        .unwrap();
        Variant::Lowness {
            c: Some("1.5".parse().unwrap()),
            labels: Arc::new(tree),
        }
    }

    fn our_move(v: &Variant, st: &mut GameState, s: &mut Lowness) -> Vec<TaggedAction> {
        apply_move(st, v, &Move::pass(Player::Opponent)).unwrap();
        let view = View {
            variant: v,
            state: st,
            last_other: &[],
            me: Player::Us,
        };
        let actions = s.next_move(&view);
        apply_move(
            st,
            v,
            &Move {
                player: Player::Us,
                actions: actions.clone(),
            },
        )
        .unwrap();
        actions
    }

    #[test]
    fn half_label_reaches_target_in_one_portion() {
        let v = variant(&[("-", 5, "1/2")]);
        let mut st = GameState::new(&v, Dyadic::one(), Dyadic::from_int(4));
        let mut s = Lowness::full("1.5".parse().unwrap()).unwrap();
        let acts = our_move(&v, &mut st, &mut s);
        let plain: Vec<&Action> = acts.iter().map(|a| &a.action).collect();
        assert!(matches!(plain[0], Action::Note(Note::Spawn(_))));
        assert_eq!(
            plain[1],
            &Action::Length {
                length: 0,
                delta: d("1/32")
            }
        );
        assert_eq!(
            plain[2],
            &Action::Object {
                object: 5,
                delta: d("1/32")
            }
        );
        assert_eq!(plain.len(), 3);
        // nothing left to do
        assert!(our_move(&v, &mut st, &mut s).is_empty());
    }

    #[test]
    fn waits_for_the_match() {
        let v = variant(&[("0", 1, "1/4"), ("00", 2, "1/4")]);
        let mut st = GameState::new(&v, Dyadic::one(), Dyadic::from_int(4));
        let mut s = Lowness::full("1.5".parse().unwrap()).unwrap();
        let first = our_move(&v, &mut st, &mut s);
        // ε·η = 1/64 for both, portions 1/32 and 1/128
        assert!(first.iter().any(|a| a.action
            == Action::Object {
                object: 1,
                delta: d("1/64")
            }));
        assert!(first.iter().any(|a| a.action
            == Action::Length {
                length: 2,
                delta: d("1/128")
            }));
        assert!(our_move(&v, &mut st, &mut s).is_empty());
        st.opponent_nodes.increase(0, "00".parse().unwrap(), d("1/64")).unwrap();
        let third = our_move(&v, &mut st, &mut s);
        let plain: Vec<Action> = third.into_iter().map(|a| a.action).collect();
        assert_eq!(
            plain,
            vec![
                Action::Length {
                    length: 2,
                    delta: d("1/128")
                },
                Action::Object {
                    object: 2,
                    delta: d("1/64")
                },
            ]
        );
    }

    #[test]
    fn sleeps_off_the_path() {
        let v = variant(&[("1", 1, "1/2")]);
        let mut st = GameState::new(&v, Dyadic::one(), Dyadic::from_int(4));
        let mut s = Lowness::new(
            "1.5".parse().unwrap(),
            "1".parse().unwrap(),
            d("1/2"),
            LengthPool::naturals(),
            0,
        )
        .unwrap();
        for _ in 0..3 {
            assert!(our_move(&v, &mut st, &mut s).is_empty());
        }
        assert!(s.top().spent.is_zero());
    }

    #[test]
    fn nested_child_uses_sub_pool() {
        let v = variant(&[("-", 3, "1/2")]);
        let mut st = GameState::new(&v, Dyadic::one(), Dyadic::from_int(4));
        let mut s = Lowness::full("2".parse().unwrap()).unwrap();
        our_move(&v, &mut st, &mut s);
        let child = s.process(1).expect("child spawned");
        assert_eq!(child.c, "1.5".parse().unwrap());
        assert_eq!(child.alpha, d("1/16"));
        assert!(child.lengths.is_subpool_of(&s.top().lengths));
        assert_eq!(child.objects, d("1/512"));
    }
}
