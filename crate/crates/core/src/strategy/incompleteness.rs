//! Our side of the incompleteness game.
//!
//! A process `P(k, x, α, L, M)` works in the subtree above `x`, spends at
//! most `α` on lengths from `L` and may only put its reserved point
//! `m ∈ M` into `W`. Nodes on the path that force `Γ^a(m) = 0` are strong.
//! For `k < 2` the process raises a private length for each strong node in
//! small portions, waiting for the opponent to match each one. For larger
//! `k` each strong node instead runs a sequence of recursive calls with
//! `k - 1/2`. Once the next step would overrun `α`, the process stops its
//! children, puts `m` into `W` and halts.

use std::collections::{BTreeMap, BTreeSet};

use crate::coef::Coef;
use crate::dyadic::Dyadic;
use crate::game::{Action, GameState, Note, Spawn, TaggedAction};
use crate::machine::{evaluate_on_path, OracleMachine};
use crate::node::Node;
use crate::pool::LengthPool;

use super::portions::{epsilon_for, nested_sigma, portion, StrategyError};
use super::{Strategy, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Live,
    Halted,
    Terminated,
}

#[derive(Debug, Clone)]
enum SlotKind {
    Base {
        length: u64,
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
pub struct ProcessP {
    pub id: u64,
    pub parent: Option<u64>,
    pub depth: u32,
    pub k: Coef,
    pub root: Node,
    pub alpha: Dyadic,
    pub lengths: LengthPool,
    pub points: LengthPool,
    pub m: u64,
    pub status: Status,
    pub spent: Dyadic,
    sigma: Dyadic,
    nested: bool,
    slots: BTreeMap<Node, Slot>,
    assigned: BTreeSet<u64>,
    announced: bool,
}

impl ProcessP {
    #[allow(clippy::too_many_arguments)]
    fn new(
        id: u64,
        parent: Option<u64>,
        depth: u32,
        k: Coef,
        root: Node,
        alpha: Dyadic,
        lengths: LengthPool,
        points: LengthPool,
    ) -> Result<Self, StrategyError> {
        let nested = !k.lt_int(2);
        let sigma = if nested { nested_sigma(&k)? } else { epsilon_for(&k)? };
        Ok(Self {
            id,
            parent,
            depth,
            k,
            root,
            alpha,
            lengths,
            points,
            // the first point of M's first part stays outside every M_y
            m: points.offset(),
            status: Status::Live,
            spent: Dyadic::zero(),
            sigma,
            nested,
            slots: BTreeMap::new(),
            assigned: BTreeSet::new(),
            announced: false,
        })
    }

    pub fn sigma(&self) -> &Dyadic {
        &self.sigma
    }

    fn spawn_note(&self) -> TaggedAction {
        Action::Note(Note::Spawn(Spawn {
            proc: self.id,
            parent: self.parent,
            root: self.root.clone(),
            budget: self.alpha.clone(),
            lengths: self.lengths,
            points: Some(self.points),
            reserved: Some(self.m),
            coef: self.k.to_string(),
            depth: self.depth,
        }))
        .by(self.id)
    }

    /// Smallest member of `L` above `|y|` not yet handed out.
    fn fresh_length(&mut self, y: &Node) -> u64 {
        let mut l = self.lengths.first_at_least(y.len() + 1).expect("length pool exhausted");
        while self.assigned.contains(&l) {
            l += self.lengths.stride();
        }
        self.assigned.insert(l);
        l
    }
}

/// A top-level process together with all its descendants.
#[derive(Debug, Clone)]
pub struct Incompleteness {
    procs: BTreeMap<u64, ProcessP>,
    top: u64,
    next_id: u64,
    machine_steps: u64,
}

impl Incompleteness {
    /// `P(k, root, α, L, M)`. Process ids start at `id_base`.
    pub fn new(
        k: Coef,
        alpha: Dyadic,
        lengths: LengthPool,
        points: LengthPool,
        machine_steps: u64,
        id_base: u64,
    ) -> Result<Self, StrategyError> {
        let top = ProcessP::new(id_base, None, 0, k, Node::root(), alpha, lengths, points)?;
        let mut procs = BTreeMap::new();
        procs.insert(id_base, top);
        Ok(Self {
            procs,
            top: id_base,
            next_id: id_base + 1,
            machine_steps,
        })
    }

    pub fn top(&self) -> &ProcessP {
        &self.procs[&self.top]
    }

    pub fn process(&self, id: u64) -> Option<&ProcessP> {
        self.procs.get(&id)
    }

    pub fn processes(&self) -> impl Iterator<Item = &ProcessP> {
        self.procs.values()
    }

    pub fn budget(&self) -> &Dyadic {
        &self.top().alpha
    }

    fn charge(&mut self, mut id: u64, delta: &Dyadic) {
        loop {
            let p = self.procs.get_mut(&id).expect("known process");
            p.spent += delta;
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
                _ => None,
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
        let p = self.procs.get_mut(&id).expect("process");
        p.status = Status::Halted;
        out.push(Action::InsertW { element: p.m }.by(id));
        out.push(Action::Note(Note::Halt { proc: id }).by(id));
    }

    /// Looks for a strong node for `m` on the current path.
    fn discover(&mut self, id: u64, machine: &dyn OracleMachine, state: &GameState) {
        let steps = self.machine_steps.saturating_add(state.step);
        let p = self.procs.get_mut(&id).expect("process");
        let eval = evaluate_on_path(machine, p.m, &state.path, steps);
        if eval.bit() != Some(false) {
            return;
        }
        let y = state.path.prefix(eval.query_extent().max(p.root.len()));
        if p.slots.contains_key(&y) {
            return;
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
                length: p.fresh_length(&y),
                placed: Dyadic::zero(),
            }
        };
        p.slots.insert(y, Slot { j, delta, kind });
    }

    fn step(&mut self, id: u64, machine: &dyn OracleMachine, state: &GameState, out: &mut Vec<TaggedAction>) {
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
        self.discover(id, machine, state);
        let awake: Vec<Node> = self.procs[&id]
            .slots
            .keys()
            .filter(|y| state.path.extends(y))
            .cloned()
            .collect();
        for y in awake {
            let stop = if self.procs[&id].nested {
                self.step_nested(id, &y, machine, state, out)
            } else {
                self.step_base(id, &y, state, out)
            };
            if stop {
                return;
            }
        }
    }

    /// Returns true when the process halted.
    fn step_base(&mut self, id: u64, y: &Node, state: &GameState, out: &mut Vec<TaggedAction>) -> bool {
        let p = &self.procs[&id];
        let slot = &p.slots[y];
        let SlotKind::Base { length, placed } = &slot.kind else {
            unreachable!("base process with nested slot")
        };
        let matched = placed.is_zero() || state.opponent_on_prefix(*length) > *placed;
        if !matched {
            return false;
        }
        if &p.spent + &slot.delta > p.alpha {
            self.halt(id, out);
            return true;
        }
        let (length, delta) = (*length, slot.delta.clone());
        if let SlotKind::Base { placed, .. } = &mut self
            .procs
            .get_mut(&id)
            .expect("process")
            .slots
            .get_mut(y)
            .expect("slot")
            .kind
        {
            *placed += &delta;
        }
        self.charge(id, &delta);
        out.push(Action::Length { length, delta }.by(id));
        false
    }

    fn step_nested(
        &mut self,
        id: u64,
        y: &Node,
        machine: &dyn OracleMachine,
        state: &GameState,
        out: &mut Vec<TaggedAction>,
    ) -> bool {
        let current = match self.procs[&id].slots[y].kind {
            SlotKind::Nested { current, .. } => current,
            SlotKind::Base { .. } => unreachable!("nested process with base slot"),
        };
        if let Some(c) = current {
            self.step(c, machine, state, out);
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
        let points = p
            .points
            .gamma_part(slot.j + 2)
            .and_then(|m| m.gamma_part(s))
            .expect("point pool overflow");
        let k = p.k.minus_half().expect("nested constant above 1/2");
        let child_id = self.next_id;
        self.next_id += 1;
        let child = ProcessP::new(
            child_id,
            Some(id),
            p.depth + 1,
            k,
            y.clone(),
            slot.delta.clone(),
            lengths,
            points,
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
        self.step(child_id, machine, state, out);
        false
    }

    /// Closed calls at their actual cost plus open calls at full budget.
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

impl Strategy for Incompleteness {
    fn name(&self) -> String {
        format!("incompleteness(k={})", self.top().k)
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let Some(machine) = view.variant.machine().cloned() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        self.step(self.top, machine.as_ref(), view.state, &mut out);
        out
    }
}

/// Several independent top-level strategies sharing one game, each with
/// its own budget and pools. All of them act in every move, in order.
pub struct Mix {
    parts: Vec<Incompleteness>,
}

impl Mix {
    pub fn new(parts: Vec<Incompleteness>) -> Result<Self, StrategyError> {
        let total: Dyadic = parts.iter().map(|p| p.budget()).sum();
        if total > Dyadic::one() {
            return Err(StrategyError::OverBudget(total));
        }
        for (i, a) in parts.iter().enumerate() {
            for (j, b) in parts.iter().enumerate().skip(i + 1) {
                let (ta, tb) = (a.top(), b.top());
                if ta.lengths.intersects(&tb.lengths) || ta.points.intersects(&tb.points) {
                    return Err(StrategyError::PoolOverlap(i, j));
                }
            }
        }
        Ok(Self { parts })
    }

    /// Sub-strategy `i` plays the `2^(i+1)` game with budget `2^-(i+1)` on
    /// the `i`-th residue class of `parts` for both lengths and points.
    pub fn geometric(parts: u64, machine_steps: u64) -> Result<Self, StrategyError> {
        let lengths = LengthPool::naturals()
            .split(parts)
            .map_err(|e| StrategyError::Config(e.to_string()))?;
        let points = LengthPool::naturals()
            .split(parts)
            .map_err(|e| StrategyError::Config(e.to_string()))?;
        let mut subs = Vec::new();
        for i in 0..parts {
            let c = Coef::from_int(1 << (i + 1).min(62));
            let k = if c.lt_int(2) {
                c
            } else {
                "1.5".parse().expect("literal")
            };
            let alpha = Dyadic::pow2_neg((i + 1) as u32);
            subs.push(Incompleteness::new(
                k,
                alpha,
                lengths[i as usize],
                points[i as usize],
                machine_steps,
                i << 32,
            )?);
        }
        Self::new(subs)
    }

    pub fn parts(&self) -> &[Incompleteness] {
        &self.parts
    }
}

impl Strategy for Mix {
    fn name(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|p| p.name()).collect();
        format!("mix[{}]", names.join(","))
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        self.parts.iter_mut().flat_map(|p| p.next_move(view)).collect()
    }
}
