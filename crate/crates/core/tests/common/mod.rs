#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ktriv::config::RunConfig;
use ktriv::dyadic::Dyadic;
use ktriv::game::{Action, AuditReport, Move, Player, Trace};
use ktriv::node::Node;

/// A named run configuration plus the side files it reads.
pub struct Scenario {
    pub name: String,
    pub config: String,
    pub files: Vec<(String, String)>,
}

impl Scenario {
    pub fn new(name: &str, config: &str) -> Self {
        Self {
            name: name.into(),
            config: config.into(),
            files: Vec::new(),
        }
    }

    pub fn with_file(mut self, name: &str, body: String) -> Self {
        self.files.push((name.into(), body));
        self
    }

    /// Writes the config and side files under `dir` and returns the
    /// config path.
    pub fn write(&self, dir: &Path) -> PathBuf {
        let here = dir.join(&self.name);
        std::fs::create_dir_all(&here).unwrap();
        for (name, body) in &self.files {
            std::fs::write(here.join(name), body).unwrap();
        }
        let path = here.join("run.cfg");
        std::fs::write(&path, &self.config).unwrap();
        path
    }

    pub fn play(&self, dir: &Path) -> (RunConfig, Trace, AuditReport) {
        let cfg = RunConfig::load(&self.write(dir)).unwrap();
        let (trace, report) = cfg.play().unwrap();
        (cfg, trace, report)
    }
}

pub fn existence(seed: u64) -> Scenario {
    Scenario::new(
        &format!("existence-{seed}"),
        &format!(
            "variant = existence\nus = solovay\nopponent = blind\nour_budget = 2\n\
             opponent_budget = 1\nhorizon = 10000\nseed = {seed}\nslots = 1000\n"
        ),
    )
}

pub fn incompleteness(k: &str, alpha: &str, opponent: &str, opponent_budget: u64) -> Scenario {
    Scenario::new(
        &format!("incompleteness-{k}-{opponent}"),
        &format!(
            "variant = incompleteness\nc = {k}\nmachine = complement\nus = incompleteness\n\
             alpha = {alpha}\nopponent = {opponent}\nour_budget = 1\n\
             opponent_budget = {opponent_budget}\nhorizon = 400000\nstrategy_steps = 100\n"
        ),
    )
}

/// Labels `(d, 2^-6)` on the prefixes `0^d` for `d = 1..=64`.
pub fn path_labels() -> String {
    (1..=64u64)
        .map(|d| format!("{} {d} 1 6\n", "0".repeat(d as usize)))
        .collect()
}

/// Label `(i, 1/2)` on the `i`-th node of depth 6.
pub fn grid_labels() -> String {
    Node::all_of_length(6)
        .enumerate()
        .map(|(i, v)| format!("{v} {i} 1 1\n"))
        .collect()
}

pub fn lowness_path() -> Scenario {
    Scenario::new(
        "lowness-path",
        &format!(
            "variant = lowness\nc = 1.9\nlabels = labels.txt\nus = lowness\nopponent = matcher\n\
             route = {}\nour_budget = 1\nopponent_budget = 4\nhorizon = 100000\n",
            "0".repeat(64)
        ),
    )
    .with_file("labels.txt", path_labels())
}

pub fn lowness_stop() -> Scenario {
    Scenario::new(
        "lowness-stop",
        "variant = lowness\nc = 1.5\nlabels = labels.txt\nus = lowness\nopponent = wanderer\n\
         routes = depth:6\nour_budget = 1\nopponent_budget = 4\nhorizon = 1000000\n",
    )
    .with_file("labels.txt", grid_labels())
}

/// Two depth-1 subtrees; the opponent serves the left one, then settles
/// on the right.
pub fn lowness_nested() -> Scenario {
    Scenario::new(
        "lowness-nested",
        "variant = lowness\nc = 2\nlabels = labels.txt\nus = lowness\nopponent = wanderer\n\
         routes = 00,10\nour_budget = 1\nopponent_budget = 4\nhorizon = 100000\n",
    )
    .with_file("labels.txt", "0 1 1 2\n00 3 1 2\n1 2 1 2\n10 4 1 2\n".into())
}

/// Per-step totals summed straight from the recorded actions.
#[derive(Debug, Default, Clone)]
pub struct Sums {
    pub our_lengths: BTreeMap<u64, Dyadic>,
    pub our_objects: BTreeMap<u64, Dyadic>,
    pub our_nodes: BTreeMap<Node, Dyadic>,
    pub opponent_lengths: BTreeMap<u64, Dyadic>,
    pub opponent_nodes: BTreeMap<Node, Dyadic>,
}

pub fn total<K>(m: &BTreeMap<K, Dyadic>) -> Dyadic {
    m.values().sum()
}

impl Sums {
    pub fn add(&mut self, mv: &Move) {
        for a in &mv.actions {
            match (&a.action, mv.player) {
                (Action::Length { length, delta }, Player::Us) => {
                    *self.our_lengths.entry(*length).or_insert_with(Dyadic::zero) += delta
                }
                (Action::Length { length, delta }, Player::Opponent) => {
                    *self.opponent_lengths.entry(*length).or_insert_with(Dyadic::zero) += delta
                }
                (Action::Object { object, delta }, _) => {
                    *self.our_objects.entry(*object).or_insert_with(Dyadic::zero) += delta
                }
                (Action::Node { node, delta }, Player::Us) => {
                    *self.our_nodes.entry(node.clone()).or_insert_with(Dyadic::zero) += delta
                }
                (Action::Node { node, delta }, Player::Opponent) => {
                    *self.opponent_nodes.entry(node.clone()).or_insert_with(Dyadic::zero) += delta
                }
                _ => {}
            }
        }
    }
}

pub fn sums(trace: &Trace) -> Sums {
    let mut s = Sums::default();
    for mv in &trace.moves {
        s.add(mv);
    }
    s
}

pub fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}
