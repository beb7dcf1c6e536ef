//! Flat `key = value` run configurations and the runner behind them.
//!
//! A configuration plus its seed fully determines the trace, so a run can
//! always be reproduced from the file alone.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::coef::Coef;
use crate::dyadic::Dyadic;
use crate::error::LoadError;
use crate::game::{audit, run, AuditOptions, AuditReport, Trace, Variant};
use crate::labels::{machine_to_labels, LabelledTree, SemimeasureMachine};
use crate::machine::parse_machine;
use crate::node::Node;
use crate::pool::LengthPool;
use crate::strategy::incompleteness::{Incompleteness, Mix};
use crate::strategy::lowness::Lowness;
use crate::strategy::opponents::{Blind, Follower, Matcher, Wanderer, DEFAULT_PREMIUM};
use crate::strategy::triviality::Solovay;
use crate::strategy::{NoOp, Strategy};

/// Environment variable overriding `strategy_steps`.
pub const STRATEGY_STEPS_ENV: &str = "KTRIV_STRATEGY_STEPS";

const KEYS: &[&str] = &[
    "variant",
    "c",
    "machine",
    "labels",
    "labels_machine",
    "machine_depth",
    "machine_steps",
    "us",
    "k",
    "alpha",
    "mix_parts",
    "opponent",
    "our_budget",
    "opponent_budget",
    "horizon",
    "gamma_steps",
    "strategy_steps",
    "seed",
    "slots",
    "route",
    "routes",
    "premium",
    "trace_out",
    "audit_out",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub variant: String,
    pub c: Option<Coef>,
    pub machine: Option<String>,
    pub labels: Option<PathBuf>,
    pub labels_machine: Option<PathBuf>,
    pub machine_depth: u64,
    pub machine_steps: u64,
    pub us: String,
    pub k: Option<Coef>,
    pub alpha: Dyadic,
    pub mix_parts: u64,
    pub opponent: String,
    pub our_budget: Dyadic,
    pub opponent_budget: Dyadic,
    pub horizon: u64,
    pub gamma_steps: u64,
    pub strategy_steps: u64,
    pub seed: u64,
    pub slots: usize,
    pub routes: Vec<Node>,
    pub premium: u32,
    pub trace_out: Option<PathBuf>,
    pub audit_out: Option<PathBuf>,
    /// Directory that relative paths are resolved against.
    pub base: PathBuf,
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, LoadError> {
    raw.parse()
        .map_err(|_| LoadError::Value(format!("bad value for {key}: {raw:?}")))
}

fn parse_routes(raw: &str) -> Result<Vec<Node>, LoadError> {
    if let Some(depth) = raw.strip_prefix("depth:") {
        let depth: u32 = value("routes", depth)?;
        if depth > 20 {
            return Err(LoadError::Value(format!("route depth {depth} too large")));
        }
        return Ok(Node::all_of_length(depth).collect());
    }
    raw.split(',').map(|r| value::<Node>("routes", r.trim())).collect()
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, LoadError> {
        let mut cfg = RunConfig {
            variant: String::new(),
            c: None,
            machine: None,
            labels: None,
            labels_machine: None,
            machine_depth: 8,
            machine_steps: 1000,
            us: String::new(),
            k: None,
            alpha: Dyadic::one(),
            mix_parts: 2,
            opponent: "noop".into(),
            our_budget: Dyadic::one(),
            opponent_budget: Dyadic::one(),
            horizon: 1000,
            gamma_steps: AuditOptions::default().gamma_steps,
            strategy_steps: 1000,
            seed: 0,
            slots: 1000,
            routes: Vec::new(),
            premium: DEFAULT_PREMIUM,
            trace_out: None,
            audit_out: None,
            base: base.to_path_buf(),
        };
        let mut seen = std::collections::BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| LoadError::Syntax { line: i + 1, message };
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected key = value".into()))?;
            let (key, raw) = (key.trim(), raw.trim());
            if !KEYS.contains(&key) {
                return Err(syntax(format!("unknown key {key:?}")));
            }
            if !seen.insert(key.to_string()) {
                return Err(syntax(format!("duplicate key {key:?}")));
            }
            match key {
                "variant" => cfg.variant = raw.to_string(),
                "c" => cfg.c = Some(value(key, raw)?),
                "machine" => cfg.machine = Some(raw.to_string()),
                "labels" => cfg.labels = Some(PathBuf::from(raw)),
                "labels_machine" => cfg.labels_machine = Some(PathBuf::from(raw)),
                "machine_depth" => cfg.machine_depth = value(key, raw)?,
                "machine_steps" => cfg.machine_steps = value(key, raw)?,
                "us" => cfg.us = raw.to_string(),
                "k" => cfg.k = Some(value(key, raw)?),
                "alpha" => cfg.alpha = value(key, raw)?,
                "mix_parts" => cfg.mix_parts = value(key, raw)?,
                "opponent" => cfg.opponent = raw.to_string(),
                "our_budget" => cfg.our_budget = value(key, raw)?,
                "opponent_budget" => cfg.opponent_budget = value(key, raw)?,
                "horizon" => cfg.horizon = value(key, raw)?,
                "gamma_steps" => cfg.gamma_steps = value(key, raw)?,
                "strategy_steps" => cfg.strategy_steps = value(key, raw)?,
                "seed" => cfg.seed = value(key, raw)?,
                "slots" => cfg.slots = value(key, raw)?,
                "route" => cfg.routes = vec![value(key, raw)?],
                "routes" => cfg.routes = parse_routes(raw)?,
                "premium" => cfg.premium = value(key, raw)?,
                "trace_out" => cfg.trace_out = Some(PathBuf::from(raw)),
                "audit_out" => cfg.audit_out = Some(PathBuf::from(raw)),
                _ => unreachable!("key list checked above"),
            }
        }
        if seen.contains("route") && seen.contains("routes") {
            return Err(LoadError::Inconsistent("give either route or routes".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Applies the step-bound overrides from the environment.
    pub fn apply_env(&mut self) {
        let get = |name: &str| std::env::var(name).ok().and_then(|v| v.trim().parse().ok());
        if let Some(n) = get(crate::game::audit::GAMMA_STEPS_ENV) {
            self.gamma_steps = n;
        }
        if let Some(n) = get(STRATEGY_STEPS_ENV) {
            self.strategy_steps = n;
        }
    }

    fn validate(&self) -> Result<(), LoadError> {
        let bad = |m: String| Err(LoadError::Inconsistent(m));
        let (ours, theirs): (&[&str], &[&str]) = match self.variant.as_str() {
            "existence" => (&["solovay", "noop"], &["blind", "noop"]),
            "incompleteness" => {
                if self.machine.is_none() {
                    return bad("incompleteness needs a machine".into());
                }
                (&["incompleteness", "mix", "noop"], &["follower", "refuser", "noop"])
            }
            "lowness" => {
                if self.labels.is_some() == self.labels_machine.is_some() {
                    return bad("lowness needs exactly one of labels, labels_machine".into());
                }
                (&["lowness", "noop"], &["matcher", "wanderer", "noop"])
            }
            "" => return bad("missing variant".into()),
            other => return bad(format!("unknown variant {other:?}")),
        };
        if !ours.contains(&self.us.as_str()) {
            return bad(format!("strategy {:?} does not play {}", self.us, self.variant));
        }
        if !theirs.contains(&self.opponent.as_str()) {
            return bad(format!("opponent {:?} does not play {}", self.opponent, self.variant));
        }
        if matches!(self.opponent.as_str(), "matcher" | "wanderer") && self.routes.is_empty() {
            return bad(format!("opponent {} needs route or routes", self.opponent));
        }
        if self.our_budget.is_zero() || self.opponent_budget.is_zero() {
            return bad("budgets must be positive".into());
        }
        if self.horizon == 0 || self.slots == 0 {
            return bad("horizon and slots must be positive".into());
        }
        if matches!(self.us.as_str(), "incompleteness" | "lowness") && self.k.is_none() && self.c.is_none() {
            return bad("strategy constant needs k or c".into());
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn variant(&self) -> Result<Variant, LoadError> {
        Ok(match self.variant.as_str() {
            "existence" => Variant::Existence,
            "incompleteness" => Variant::Incompleteness {
                c: self.c.clone(),
                machine: parse_machine(self.machine.as_deref().unwrap_or_default(), &self.base)?,
            },
            _ => {
                let labels = match (&self.labels, &self.labels_machine) {
                    (Some(path), _) => LabelledTree::load(&self.resolve(path))?,
                    (None, Some(path)) => {
                        let m = SemimeasureMachine::load(&self.resolve(path))?;
                        machine_to_labels(&m, self.machine_depth, self.machine_steps)
                    }
                    (None, None) => unreachable!("validated"),
                };
                Variant::Lowness {
                    c: self.c.clone(),
                    labels: Arc::new(labels),
                }
            }
        })
    }

    fn constant(&self) -> Coef {
        self.k.clone().or_else(|| self.c.clone()).expect("validated")
    }

    fn our_strategy(&self) -> Result<Box<dyn Strategy>, LoadError> {
        let strategy_err = |e: crate::strategy::portions::StrategyError| LoadError::Value(e.to_string());
        Ok(match self.us.as_str() {
            "solovay" => Box::new(Solovay::new()),
            "incompleteness" => Box::new(
                Incompleteness::new(
                    self.constant(),
                    self.alpha.clone(),
                    LengthPool::naturals(),
                    LengthPool::naturals(),
                    self.strategy_steps,
                    0,
                )
                .map_err(strategy_err)?,
            ),
            "mix" => Box::new(Mix::geometric(self.mix_parts, self.strategy_steps).map_err(strategy_err)?),
            "lowness" => Box::new(
                Lowness::new(
                    self.constant(),
                    Node::root(),
                    self.alpha.clone(),
                    LengthPool::naturals(),
                    0,
                )
                .map_err(strategy_err)?,
            ),
            _ => Box::new(NoOp),
        })
    }

    fn opponent_strategy(&self) -> Box<dyn Strategy> {
        match self.opponent.as_str() {
            "blind" => Box::new(Blind::new(self.seed, self.slots)),
            "follower" => Box::new(Follower::matching(self.strategy_steps, self.premium)),
            "refuser" => Box::new(Follower::refusing(self.strategy_steps)),
            "matcher" => Box::new(Matcher::new(self.routes[0].clone(), self.premium)),
            "wanderer" => Box::new(Wanderer::new(self.routes.clone(), self.premium)),
            _ => Box::new(NoOp),
        }
    }

    pub fn audit_options(&self) -> AuditOptions {
        AuditOptions {
            gamma_steps: self.gamma_steps,
        }
    }

    /// Plays the configured game and audits the trace.
    pub fn play(&self) -> Result<(Trace, AuditReport), LoadError> {
        let variant = self.variant()?;
        let mut us = self.our_strategy()?;
        let mut opponent = self.opponent_strategy();
        let trace = run(
            &variant,
            self.our_budget.clone(),
            self.opponent_budget.clone(),
            us.as_mut(),
            opponent.as_mut(),
            self.horizon,
        );
        let report = audit(&trace, &variant, &self.audit_options()).expect("trace made for this variant");
        Ok((trace, report))
    }

    pub fn trace_path(&self) -> Option<PathBuf> {
        self.trace_out.as_ref().map(|p| self.resolve(p))
    }

    pub fn audit_path(&self) -> Option<PathBuf> {
        self.audit_out.as_ref().map(|p| self.resolve(p))
    }
}
