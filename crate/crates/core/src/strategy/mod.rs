//! Players. Each strategy sees the full position and the other player's
//! last move, and answers with a finite list of actions.

pub mod incompleteness;
pub mod lowness;
pub mod opponents;
pub mod portions;
pub mod triviality;

use crate::game::{GameState, Player, TaggedAction, Variant};

pub struct View<'a> {
    pub variant: &'a Variant,
    pub state: &'a GameState,
    pub last_other: &'a [TaggedAction],
    pub me: Player,
}

pub trait Strategy {
    fn name(&self) -> String;

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction>;

    /// True when passing again would change nothing; the engine may stop
    /// a run once both sides pass and are quiescent.
    fn quiescent(&self) -> bool {
        true
    }
}

/// Always passes.
#[derive(Debug, Clone, Default)]
pub struct NoOp;

impl Strategy for NoOp {
    fn name(&self) -> String {
        "noop".into()
    }

    fn next_move(&mut self, _: &View<'_>) -> Vec<TaggedAction> {
        Vec::new()
    }
}
