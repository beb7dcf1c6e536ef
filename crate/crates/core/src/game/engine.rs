use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::ledger::WeightLedger;
use crate::strategy::{Strategy, View};

use super::moves::{Action, Move, Player, TaggedAction};
use super::state::GameState;
use super::trace::{Trace, TraceEnd, TraceHeader};
use super::variant::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Budget,
    Shrink,
    TurnOrder,
    Forbidden,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Budget => "budget",
            ViolationKind::Shrink => "shrink",
            ViolationKind::TurnOrder => "turn_order",
            ViolationKind::Forbidden => "forbidden",
        })
    }
}

/// A rule broken by `player`, who thereby loses immediately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: u64,
    pub player: Player,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}@{}", self.player, self.kind, self.step)
    }
}

fn pending_sum<K: Ord + Clone>(ledger: &WeightLedger<K>, extra: &Dyadic) -> Result<Dyadic, (Dyadic, Dyadic)> {
    let total = ledger.total() + extra;
    if &total > ledger.budget() {
        Err((total, ledger.budget().clone()))
    } else {
        Ok(total)
    }
}

/// Checks the whole move against the rules without touching the state.
pub fn validate(state: &GameState, variant: &Variant, mv: &Move) -> Result<(), Violation> {
    let fail = |kind, detail: String| Violation {
        step: state.step,
        player: mv.player,
        kind,
        detail,
    };
    let expected = Player::to_move(state.step);
    if mv.player != expected {
        return Err(fail(
            ViolationKind::TurnOrder,
            format!("step {} belongs to {expected}", state.step),
        ));
    }
    let mut lengths = Dyadic::zero();
    let mut nodes = Dyadic::zero();
    let mut objects = Dyadic::zero();
    let mut flipped = BTreeSet::new();
    for tagged in &mv.actions {
        let action = &tagged.action;
        if !variant.permits(mv.player, action) {
            return Err(fail(
                ViolationKind::Forbidden,
                format!("{} may not use {} actions", mv.player, action.kind()),
            ));
        }
        match action {
            Action::Length { delta, .. } => lengths += delta,
            Action::Node { delta, .. } => nodes += delta,
            Action::Object { delta, .. } => objects += delta,
            Action::Flip { index } => {
                if matches!(variant, Variant::Existence) {
                    // the constructed set only grows
                    if state.path.bit(*index) || !flipped.insert(*index) {
                        return Err(fail(
                            ViolationKind::Shrink,
                            format!("element {index} would leave the set"),
                        ));
                    }
                }
            }
            Action::Enumerate { set, .. } => {
                if *set == 0 {
                    return Err(fail(ViolationKind::Forbidden, "sets are indexed from 1".into()));
                }
            }
            Action::InsertW { .. } | Action::Note(_) => {}
        }
    }
    let (length_ledger, node_ledger) = match mv.player {
        Player::Us => (&state.our_lengths, &state.our_nodes),
        Player::Opponent => (&state.opponent_lengths, &state.opponent_nodes),
    };
    let over = |what: &str, (total, budget): (Dyadic, Dyadic)| {
        fail(
            ViolationKind::Budget,
            format!("{what} total would reach {total}, budget {budget}"),
        )
    };
    let length_total = pending_sum(length_ledger, &lengths).map_err(|e| over("length", e))?;
    pending_sum(node_ledger, &nodes).map_err(|e| over("node", e))?;
    let object_total = pending_sum(&state.our_objects, &objects).map_err(|e| over("object", e))?;
    let ours = mv.player == Player::Us;
    if ours && matches!(variant, Variant::Lowness { .. }) && object_total > length_total {
        return Err(fail(
            ViolationKind::Budget,
            format!("object total {object_total} would exceed length total {length_total}"),
        ));
    }
    Ok(())
}

/// Validates and then applies `mv` atomically, advancing the step.
pub fn apply_move(state: &mut GameState, variant: &Variant, mv: &Move) -> Result<(), Violation> {
    validate(state, variant, mv)?;
    let step = state.step;
    let ours = mv.player == Player::Us;
    for tagged in &mv.actions {
        // budgets were checked for the whole move above
        let res = match &tagged.action {
            Action::Length { length, delta } => {
                let ledger = if ours {
                    &mut state.our_lengths
                } else {
                    &mut state.opponent_lengths
                };
                ledger.increase(step, *length, delta.clone())
            }
            Action::Node { node, delta } => {
                let ledger = if ours {
                    &mut state.our_nodes
                } else {
                    &mut state.opponent_nodes
                };
                ledger.increase(step, node.clone(), delta.clone())
            }
            Action::Object { object, delta } => state.our_objects.increase(step, *object, delta.clone()),
            Action::Flip { index } => {
                state.path.flip(step, *index);
                Ok(())
            }
            Action::Enumerate { set, element } => {
                state.w_sets.entry(*set).or_default().insert(*element);
                Ok(())
            }
            Action::InsertW { element } => {
                state.w.insert(*element);
                Ok(())
            }
            Action::Note(_) => Ok(()),
        };
        res.expect("move validated before application");
    }
    state.step += 1;
    Ok(())
}

/// Plays `us` against `opponent` for at most `horizon` steps.
///
/// The run ends early after a violation, or once both players have passed
/// in a row while declaring themselves quiescent.
pub fn run(
    variant: &Variant,
    our_budget: Dyadic,
    opponent_budget: Dyadic,
    us: &mut dyn Strategy,
    opponent: &mut dyn Strategy,
    horizon: u64,
) -> Trace {
    let header = TraceHeader::new(variant, &our_budget, &opponent_budget, horizon);
    let mut state = GameState::new(variant, our_budget, opponent_budget);
    let mut last: BTreeMap<Player, Vec<TaggedAction>> = BTreeMap::new();
    let mut moves = Vec::new();
    let mut violation = None;
    let mut passes_in_a_row = 0;
    for step in 0..horizon {
        let player = Player::to_move(step);
        let none = Vec::new();
        let view = View {
            variant,
            state: &state,
            last_other: last.get(&player.other()).unwrap_or(&none),
            me: player,
        };
        let strategy: &mut dyn Strategy = match player {
            Player::Us => &mut *us,
            Player::Opponent => &mut *opponent,
        };
        let actions = strategy.next_move(&view);
        let mv = Move { player, actions };
        let result = apply_move(&mut state, variant, &mv);
        passes_in_a_row = if mv.is_pass() { passes_in_a_row + 1 } else { 0 };
        last.insert(player, mv.actions.clone());
        moves.push(mv);
        if let Err(v) = result {
            violation = Some(v);
            break;
        }
        if passes_in_a_row >= 2 && us.quiescent() && opponent.quiescent() {
            break;
        }
    }
    Trace {
        header,
        end: TraceEnd {
            steps: moves.len() as u64,
            violation,
        },
        moves,
    }
}

/// Re-executes recorded moves from the initial position.
pub fn replay(trace: &Trace, variant: &Variant) -> (GameState, Option<Violation>) {
    let mut state = GameState::new(
        variant,
        trace.header.our_budget.clone(),
        trace.header.opponent_budget.clone(),
    );
    for mv in &trace.moves {
        if let Err(v) = apply_move(&mut state, variant, mv) {
            return (state, Some(v));
        }
    }
    (state, None)
}
