//! Weight-matching games on binary trees: exact dyadic ledgers, a turn-based
//! engine with trace audits, the strategies that win these games, and the
//! covering toolkit for effectively open sets.

pub mod coef;
pub mod config;
pub mod covering;
pub mod dyadic;
pub mod error;
pub mod game;
pub mod labels;
pub mod ledger;
pub mod machine;
pub mod node;
pub mod path;
pub mod pool;
pub mod strategy;
