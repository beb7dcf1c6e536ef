//! Scripted opponents used to exercise our strategies.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Dyadic;
use crate::game::{Action, GameState, Note, TaggedAction};
use crate::machine::evaluate_on_path;
use crate::node::Node;
use crate::path::PathApprox;

use super::{Strategy, View};

/// Default premium exponent: matches overshoot by `2^-40`.
pub const DEFAULT_PREMIUM: u32 = 40;

/// Raises the opponent's weight on the `ℓ`-prefix of `path` above ours at
/// `ℓ`, for each given length that is not already strictly matched.
fn match_lengths(
    state: &GameState,
    path: &PathApprox,
    lengths: impl IntoIterator<Item = u64>,
    premium: &Dyadic,
) -> Vec<TaggedAction> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for len in lengths {
        if !seen.insert(len) {
            continue;
        }
        let ours = state.our_lengths.get(&len);
        if ours.is_zero() {
            continue;
        }
        let node = path.prefix(len);
        let theirs = state.opponent_nodes.get(&node);
        if theirs <= ours {
            let delta = &ours.checked_sub(&theirs).expect("checked above") + premium;
            out.push(Action::Node { node, delta }.into());
        }
    }
    out
}

fn touched_lengths(actions: &[TaggedAction]) -> Vec<u64> {
    actions
        .iter()
        .filter_map(|a| match a.action {
            Action::Length { length, .. } => Some(length),
            _ => None,
        })
        .collect()
}

/// Flips that move `path` onto `route`: bits below `|route|` copied,
/// ones beyond it cleared.
fn flips_to(path: &PathApprox, route: &Node) -> Vec<u64> {
    let mut flips: Vec<u64> = (0..route.len()).filter(|&i| path.bit(i) != route.bit(i)).collect();
    flips.extend(path.ones().range(route.len()..).copied());
    flips
}

/// Existence-game opponent that ignores us: drip-feeds `μ(n) = 2^-(n+1)`
/// for `n < 64` in four chunks each and enumerates 16 sets `W_1..W_16` of
/// eight random elements below 160, all at random times.
#[derive(Debug, Clone)]
pub struct Blind {
    script: Vec<Vec<Action>>,
    cursor: usize,
}

impl Blind {
    pub const LENGTHS: u64 = 64;
    pub const CHUNKS: u32 = 4;
    pub const SETS: u64 = 16;
    pub const PER_SET: usize = 8;
    pub const ELEMENT_BOUND: u64 = 160;

    pub fn new(seed: u64, slots: usize) -> Self {
        assert!(slots > 0, "at least one move slot");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut actions = Vec::new();
        for n in 0..Self::LENGTHS {
            for _ in 0..Self::CHUNKS {
                actions.push(Action::Length {
                    length: n,
                    delta: Dyadic::pow2_neg(n as u32 + 3),
                });
            }
        }
        for set in 1..=Self::SETS {
            for _ in 0..Self::PER_SET {
                actions.push(Action::Enumerate {
                    set,
                    element: rng.gen_range(0..Self::ELEMENT_BOUND),
                });
            }
        }
        actions.shuffle(&mut rng);
        let mut script = vec![Vec::new(); slots];
        for a in actions {
            script[rng.gen_range(0..slots)].push(a);
        }
        Self::from_script(script)
    }

    pub fn from_script(script: Vec<Vec<Action>>) -> Self {
        Self { script, cursor: 0 }
    }

    pub fn script(&self) -> &[Vec<Action>] {
        &self.script
    }
}

impl Strategy for Blind {
    fn name(&self) -> String {
        "blind".into()
    }

    fn next_move(&mut self, _: &View<'_>) -> Vec<TaggedAction> {
        let Some(actions) = self.script.get(self.cursor) else {
            return Vec::new();
        };
        self.cursor += 1;
        actions.iter().cloned().map(Into::into).collect()
    }

    fn quiescent(&self) -> bool {
        self.cursor >= self.script.len()
    }
}

/// Incompleteness-game opponent that keeps `Γ^a(m) = W(m)` for every point
/// `m` our processes have announced, by flipping bits `Γ` read. Unless it
/// refuses, it also matches every length we touched (all lengths after it
/// moved the path).
#[derive(Debug, Clone)]
pub struct Follower {
    steps: u64,
    premium: Option<Dyadic>,
    probed: BTreeSet<u64>,
}

impl Follower {
    pub fn matching(steps: u64, premium: u32) -> Self {
        Self {
            steps,
            premium: Some(Dyadic::pow2_neg(premium)),
            probed: BTreeSet::new(),
        }
    }

    pub fn refusing(steps: u64) -> Self {
        Self {
            steps,
            premium: None,
            probed: BTreeSet::new(),
        }
    }

    pub fn probed(&self) -> &BTreeSet<u64> {
        &self.probed
    }
}

impl Strategy for Follower {
    fn name(&self) -> String {
        if self.premium.is_some() { "follower" } else { "refuser" }.into()
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let state = view.state;
        let mut recheck = false;
        for a in view.last_other {
            match &a.action {
                Action::Note(Note::Spawn(s)) => {
                    if let Some(m) = s.reserved {
                        recheck |= self.probed.insert(m);
                    }
                }
                Action::InsertW { .. } => recheck = true,
                _ => {}
            }
        }
        let mut path = state.path.clone();
        let mut flips: Vec<u64> = Vec::new();
        if let (true, Some(machine)) = (recheck, view.variant.machine()) {
            let steps = self.steps.saturating_add(state.step);
            for &m in &self.probed {
                let want = state.w.contains(&m);
                let eval = evaluate_on_path(machine.as_ref(), m, &path, steps);
                if eval.bit() == Some(want) {
                    continue;
                }
                let queries = match &eval {
                    crate::machine::Evaluation::Output { queries, .. } => queries.clone(),
                    crate::machine::Evaluation::Pending => Vec::new(),
                };
                for &q in queries.iter().rev() {
                    path.flip(state.step, q);
                    if evaluate_on_path(machine.as_ref(), m, &path, steps).bit() == Some(want) {
                        flips.push(q);
                        break;
                    }
                    path.flip(state.step, q);
                }
            }
        }
        let mut out: Vec<TaggedAction> = flips.iter().map(|&index| Action::Flip { index }.into()).collect();
        if let Some(premium) = &self.premium {
            let dirty: Vec<u64> = if flips.is_empty() {
                touched_lengths(view.last_other)
            } else {
                state.our_lengths.entries().keys().copied().collect()
            };
            out.extend(match_lengths(state, &path, dirty, premium));
        }
        out
    }
}

/// Lowness-game opponent that moves onto a fixed route once and then
/// matches everything.
#[derive(Debug, Clone)]
pub struct Matcher {
    route: Node,
    premium: Dyadic,
}

impl Matcher {
    pub fn new(route: Node, premium: u32) -> Self {
        Self {
            route,
            premium: Dyadic::pow2_neg(premium),
        }
    }
}

impl Strategy for Matcher {
    fn name(&self) -> String {
        "matcher".into()
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let state = view.state;
        let mut path = state.path.clone();
        let flips = flips_to(&path, &self.route);
        for &i in &flips {
            path.flip(state.step, i);
        }
        let mut out: Vec<TaggedAction> = flips.into_iter().map(|index| Action::Flip { index }.into()).collect();
        let all = state.our_lengths.entries().keys().copied();
        out.extend(match_lengths(state, &path, all, &self.premium));
        out
    }
}

/// Visits a list of routes. It moves on whenever our last move changed
/// nothing, matches only what we just touched, and settles on the last
/// route, where it matches everything.
#[derive(Debug, Clone)]
pub struct Wanderer {
    routes: Vec<Node>,
    at: Option<usize>,
    premium: Dyadic,
}

impl Wanderer {
    pub fn new(routes: Vec<Node>, premium: u32) -> Self {
        assert!(!routes.is_empty(), "at least one route");
        Self {
            routes,
            at: None,
            premium: Dyadic::pow2_neg(premium),
        }
    }

    pub fn route_index(&self) -> Option<usize> {
        self.at
    }
}

impl Strategy for Wanderer {
    fn name(&self) -> String {
        format!("wanderer({})", self.routes.len())
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let state = view.state;
        let idle = view.last_other.iter().all(|a| matches!(a.action, Action::Note(_)));
        let last = self.routes.len() - 1;
        let next = match self.at {
            None => Some(0),
            Some(i) if i < last && idle => Some(i + 1),
            _ => None,
        };
        let mut path = state.path.clone();
        let mut out = Vec::new();
        if let Some(i) = next {
            self.at = Some(i);
            for index in flips_to(&path, &self.routes[i]) {
                path.flip(state.step, index);
                out.push(Action::Flip { index }.into());
            }
        }
        let lengths: Vec<u64> = if self.at == Some(last) {
            state.our_lengths.entries().keys().copied().collect()
        } else {
            touched_lengths(view.last_other)
        };
        out.extend(match_lengths(state, &path, lengths, &self.premium));
        out
    }

    fn quiescent(&self) -> bool {
        self.at == Some(self.routes.len() - 1)
    }
}
