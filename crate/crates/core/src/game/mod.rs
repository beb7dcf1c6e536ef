//! The three weight-matching games as explicit turn-based protocols.

pub mod audit;
pub mod engine;
pub mod moves;
pub mod state;
pub mod trace;
pub mod variant;

pub use audit::{audit, AuditOptions, AuditReport, Verdict};
pub use engine::{apply_move, replay, run, Violation, ViolationKind};
pub use moves::{Action, Move, Note, Player, Spawn, TaggedAction};
pub use state::GameState;
pub use trace::{Trace, TraceHeader};
pub use variant::Variant;
