use std::collections::{BTreeMap, BTreeSet};

use crate::dyadic::Dyadic;
use crate::ledger::{LedgerKind, WeightLedger};
use crate::node::Node;
use crate::path::PathApprox;

use super::variant::Variant;

/// Full game position. Which ledgers a variant actually uses is decided by
/// [`Variant::permits`]; the rest stay empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub step: u64,
    /// The opponent's sequence `a`, or our set `A` in the existence game.
    pub path: PathApprox,
    pub opponent_lengths: WeightLedger<u64>,
    pub opponent_nodes: WeightLedger<Node>,
    pub our_lengths: WeightLedger<u64>,
    pub our_nodes: WeightLedger<Node>,
    pub our_objects: WeightLedger<u64>,
    pub w: BTreeSet<u64>,
    pub w_sets: BTreeMap<u64, BTreeSet<u64>>,
}

impl GameState {
    pub fn new(_variant: &Variant, our_budget: Dyadic, opponent_budget: Dyadic) -> Self {
        assert!(
            !our_budget.is_zero() && !opponent_budget.is_zero(),
            "budgets must be positive"
        );
        Self {
            step: 0,
            path: PathApprox::new(),
            opponent_lengths: WeightLedger::new(LedgerKind::Lengths, opponent_budget.clone()),
            opponent_nodes: WeightLedger::new(LedgerKind::Nodes, opponent_budget),
            our_lengths: WeightLedger::new(LedgerKind::Lengths, our_budget.clone()),
            our_nodes: WeightLedger::new(LedgerKind::Nodes, our_budget.clone()),
            our_objects: WeightLedger::new(LedgerKind::Objects, our_budget),
            w: BTreeSet::new(),
            w_sets: BTreeMap::new(),
        }
    }

    /// Opponent weight on the current `len`-bit prefix of the path.
    pub fn opponent_on_prefix(&self, len: u64) -> Dyadic {
        self.opponent_nodes.get(&self.path.prefix(len))
    }

    /// Our weight on the current `len`-bit prefix of the path.
    pub fn ours_on_prefix(&self, len: u64) -> Dyadic {
        self.our_nodes.get(&self.path.prefix(len))
    }
}
