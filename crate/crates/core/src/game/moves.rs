use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::node::Node;
use crate::pool::LengthPool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Us,
    Opponent,
}

impl Player {
    /// The opponent moves on even steps, we move on odd ones.
    pub fn to_move(step: u64) -> Player {
        if step.is_multiple_of(2) {
            Player::Opponent
        } else {
            Player::Us
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::Us => Player::Opponent,
            Player::Opponent => Player::Us,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Us => "us",
            Player::Opponent => "opponent",
        })
    }
}

/// Bookkeeping emitted by strategies so that audits can attribute weight
/// to the processes that placed it. Notes never change the game state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Note {
    Spawn(Spawn),
    /// The process stopped on its own.
    Halt {
        proc: u64,
    },
    /// The process was stopped by its parent.
    Terminate {
        proc: u64,
    },
    /// Requirement `n` was satisfied by `u` entering the constructed set.
    Handle {
        n: u64,
        u: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spawn {
    pub proc: u64,
    pub parent: Option<u64>,
    pub root: Node,
    pub budget: Dyadic,
    pub lengths: LengthPool,
    pub points: Option<LengthPool>,
    pub reserved: Option<u64>,
    pub coef: String,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Length { length: u64, delta: Dyadic },
    Node { node: Node, delta: Dyadic },
    Object { object: u64, delta: Dyadic },
    Flip { index: u64 },
    Enumerate { set: u64, element: u64 },
    InsertW { element: u64 },
    Note(Note),
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Length { .. } => "length",
            Action::Node { .. } => "node",
            Action::Object { .. } => "object",
            Action::Flip { .. } => "flip",
            Action::Enumerate { .. } => "enumerate",
            Action::InsertW { .. } => "insert_w",
            Action::Note(_) => "note",
        }
    }

    pub fn by(self, proc: u64) -> TaggedAction {
        TaggedAction {
            action: self,
            proc: Some(proc),
        }
    }
}

/// An action together with the process (if any) that asked for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedAction {
    pub action: Action,
    pub proc: Option<u64>,
}

impl From<Action> for TaggedAction {
    fn from(action: Action) -> Self {
        TaggedAction { action, proc: None }
    }
}

/// A finite list of actions; an empty list is a pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub player: Player,
    pub actions: Vec<TaggedAction>,
}

impl Move {
    pub fn pass(player: Player) -> Self {
        Move {
            player,
            actions: Vec::new(),
        }
    }

    pub fn is_pass(&self) -> bool {
        self.actions.is_empty()
    }

    /// True when the move changes nothing but notes.
    pub fn is_idle(&self) -> bool {
        self.actions.iter().all(|a| matches!(a.action, Action::Note(_)))
    }
}
