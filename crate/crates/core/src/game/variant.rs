use std::fmt;
use std::sync::Arc;

use crate::coef::Coef;
use crate::labels::LabelledTree;
use crate::machine::OracleMachine;

use super::moves::{Action, Player};

/// Which game is played. The declared constant and the machine (or
/// labelling) are fixed before the first move; `c = None` is the
/// unrestricted game.
#[derive(Clone)]
pub enum Variant {
    /// The opponent raises length weights `μ` and enumerates the sets
    /// `W_n`; we raise node weights `ν` and build the set `A`.
    Existence,
    /// We raise length weights and enumerate `W`; the opponent moves the
    /// path and raises node weights, trying to keep `Γ^a = W`.
    Incompleteness {
        c: Option<Coef>,
        machine: Arc<dyn OracleMachine>,
    },
    /// We raise length and object weights; the opponent moves the path and
    /// raises node weights.
    Lowness { c: Option<Coef>, labels: Arc<LabelledTree> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Existence => "existence",
            Variant::Incompleteness { .. } => "incompleteness",
            Variant::Lowness { .. } => "lowness",
        }
    }

    pub fn declared_c(&self) -> Option<&Coef> {
        match self {
            Variant::Existence => None,
            Variant::Incompleteness { c, .. } | Variant::Lowness { c, .. } => c.as_ref(),
        }
    }

    pub fn machine(&self) -> Option<&Arc<dyn OracleMachine>> {
        match self {
            Variant::Incompleteness { machine, .. } => Some(machine),
            _ => None,
        }
    }

    pub fn labels(&self) -> Option<&Arc<LabelledTree>> {
        match self {
            Variant::Lowness { labels, .. } => Some(labels),
            _ => None,
        }
    }

    /// Whether `player` may use this kind of action at all.
    pub fn permits(&self, player: Player, action: &Action) -> bool {
        use Action as A;
        if matches!(action, A::Note(_)) {
            return true;
        }
        match (self, player) {
            (Variant::Existence, Player::Opponent) => {
                matches!(action, A::Length { .. } | A::Enumerate { .. })
            }
            (Variant::Existence, Player::Us) => matches!(action, A::Node { .. } | A::Flip { .. }),
            (Variant::Incompleteness { .. }, Player::Us) => {
                matches!(action, A::Length { .. } | A::InsertW { .. })
            }
            (Variant::Lowness { .. }, Player::Us) => {
                matches!(action, A::Length { .. } | A::Object { .. })
            }
            (_, Player::Opponent) => matches!(action, A::Flip { .. } | A::Node { .. }),
        }
    }
}

impl fmt::Debug for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Existence => f.write_str("Existence"),
            Variant::Incompleteness { c, machine } => f
                .debug_struct("Incompleteness")
                .field("c", c)
                .field("machine", &machine.describe())
                .finish(),
            Variant::Lowness { c, labels } => f
                .debug_struct("Lowness")
                .field("c", c)
                .field("labels", &labels.len())
                .finish(),
        }
    }
}
