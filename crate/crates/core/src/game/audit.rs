//! Win-condition verdicts recomputed from a trace alone.
//!
//! Every limit condition is read at the horizon: the final path stands in
//! for the limit path and `path_stable_since` says since when it has not
//! moved.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use num_rational::BigRational;
use num_traits::Zero;

use crate::coef::Coef;
use crate::dyadic::{format_ratio, Dyadic};
use crate::error::TraceError;
use crate::machine::{evaluate_on_path, Evaluation};
use crate::node::Node;
use crate::pool::LengthPool;

use super::engine::{apply_move, ViolationKind};
use super::moves::{Action, Note, Player, Spawn};
use super::state::GameState;
use super::trace::Trace;
use super::variant::Variant;

/// Environment variable overriding [`AuditOptions::gamma_steps`].
pub const GAMMA_STEPS_ENV: &str = "KTRIV_GAMMA_STEPS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditOptions {
    /// Step bound for evaluating `Γ` on the final path.
    pub gamma_steps: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { gamma_steps: 100_000 }
    }
}

impl AuditOptions {
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(n) = std::env::var(GAMMA_STEPS_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            opts.gamma_steps = n;
        }
        opts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Our win conditions hold at the horizon.
    Ours,
    /// The opponent still meets all of its conditions.
    Opponent,
    /// Somebody broke a rule.
    Violation,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Ours => "ours",
            Verdict::Opponent => "opponent",
            Verdict::Violation => "violation",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Ours => 0,
            Verdict::Opponent => 1,
            Verdict::Violation => 2,
        }
    }
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    entries: Vec<(String, String)>,
}

impl AuditReport {
    fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// A `true`/`false` entry.
    pub fn flag(&self, key: &str) -> Option<bool> {
        match self.get(key)? {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        }
    }

    pub fn dyadic(&self, key: &str) -> Option<Dyadic> {
        self.get(key)?.parse().ok()
    }

    pub fn verdict(&self) -> Verdict {
        match self.get("verdict") {
            Some("ours") => Verdict::Ours,
            Some("violation") => Verdict::Violation,
            _ => Verdict::Opponent,
        }
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut report = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| TraceError::Malformed {
                line: i + 1,
                message: "expected key=value".into(),
            })?;
            report.push(k, v);
        }
        Ok(report)
    }
}

fn ratio(num: &Dyadic, den: &Dyadic) -> BigRational {
    num.to_ratio() / den.to_ratio()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ProcStatus {
    Live,
    Halted,
    Terminated,
}

#[derive(Debug, Clone)]
struct ProcRecord {
    spawn: Spawn,
    status: ProcStatus,
    spent: Dyadic,
}

/// Process tree rebuilt from notes, with pool and budget checks applied
/// as each tagged action is seen.
#[derive(Debug, Default)]
struct Processes {
    procs: BTreeMap<u64, ProcRecord>,
    problems: Vec<String>,
}

impl Processes {
    fn note(&mut self, step: u64, note: &Note) {
        match note {
            Note::Spawn(s) => {
                if self.procs.contains_key(&s.proc) {
                    self.problems
                        .push(format!("step {step}: process {} spawned twice", s.proc));
                    return;
                }
                if let Some(parent) = s.parent.and_then(|p| self.procs.get(&p)) {
                    let ps = &parent.spawn;
                    if !s.lengths.is_subpool_of(&ps.lengths) {
                        self.problems
                            .push(format!("step {step}: lengths of {} leave its parent's", s.proc));
                    }
                    if let (Some(mine), Some(theirs)) = (s.points, ps.points) {
                        if !mine.is_subpool_of(&theirs) || ps.reserved.is_some_and(|m| mine.contains(m)) {
                            self.problems
                                .push(format!("step {step}: points of {} clash with its parent", s.proc));
                        }
                    }
                } else if s.parent.is_some() {
                    self.problems.push(format!("step {step}: parent of {} unknown", s.proc));
                }
                if let (Some(m), Some(points)) = (s.reserved, s.points) {
                    if !points.contains(m) {
                        self.problems
                            .push(format!("step {step}: reserved point of {} outside M", s.proc));
                    }
                }
                self.procs.insert(
                    s.proc,
                    ProcRecord {
                        spawn: s.clone(),
                        status: ProcStatus::Live,
                        spent: Dyadic::zero(),
                    },
                );
            }
            Note::Halt { proc } => self.set_status(*proc, ProcStatus::Halted),
            Note::Terminate { proc } => self.set_status(*proc, ProcStatus::Terminated),
            Note::Handle { .. } => {}
        }
    }

    fn set_status(&mut self, id: u64, status: ProcStatus) {
        if let Some(p) = self.procs.get_mut(&id) {
            p.status = status;
        }
    }

    fn length(&mut self, step: u64, proc: Option<u64>, length: u64, delta: &Dyadic) {
        let Some(mut id) = proc.filter(|p| self.procs.contains_key(p)) else {
            self.problems
                .push(format!("step {step}: length {length} raised by no known process"));
            return;
        };
        if !self.procs[&id].spawn.lengths.contains(length) {
            self.problems
                .push(format!("step {step}: length {length} outside the pool of {id}"));
        }
        loop {
            let p = self.procs.get_mut(&id).expect("known");
            p.spent += delta;
            if p.spent > p.spawn.budget {
                self.problems.push(format!("step {step}: process {id} over its budget"));
            }
            let parent = p.spawn.parent;
            match parent {
                Some(up) if self.procs.contains_key(&up) => id = up,
                _ => break,
            }
        }
    }

    fn insert_w(&mut self, step: u64, proc: Option<u64>, element: u64) {
        let ok = proc
            .and_then(|p| self.procs.get(&p))
            .is_some_and(|p| p.spawn.reserved == Some(element));
        if !ok {
            self.problems
                .push(format!("step {step}: {element} put into W by a process not owning it"));
        }
    }
}

struct ExistenceChecks {
    cover_failure: Option<(u64, u64)>,
    qualifying: BTreeSet<u64>,
    handled: BTreeSet<u64>,
}

/// Recomputes all verdicts for `trace` played under `variant`.
pub fn audit(trace: &Trace, variant: &Variant, opts: &AuditOptions) -> Result<AuditReport, TraceError> {
    if trace.header.variant != variant.name() {
        return Err(TraceError::VariantMismatch {
            expected: variant.name().into(),
            found: trace.header.variant.clone(),
        });
    }
    let mut state = GameState::new(
        variant,
        trace.header.our_budget.clone(),
        trace.header.opponent_budget.clone(),
    );
    let mut violation = None;
    let mut procs = Processes::default();
    let mut existence = ExistenceChecks {
        cover_failure: None,
        qualifying: BTreeSet::new(),
        handled: BTreeSet::new(),
    };
    let mut objects_ok = true;
    let mut lengths_ok = true;
    let steps = trace.moves.len() as u64;
    for mv in &trace.moves {
        let step = state.step;
        if let Err(v) = apply_move(&mut state, variant, mv) {
            violation = Some(v);
            break;
        }
        for tagged in &mv.actions {
            match (&tagged.action, mv.player) {
                (Action::Note(note), Player::Us) => {
                    if let Note::Handle { n, .. } = note {
                        existence.handled.insert(*n);
                    }
                    procs.note(step, note);
                }
                (Action::Length { length, delta }, Player::Us) if !matches!(variant, Variant::Existence) => {
                    procs.length(step, tagged.proc, *length, delta)
                }
                (Action::InsertW { element }, Player::Us) => procs.insert_w(step, tagged.proc, *element),
                (Action::Enumerate { set, element }, Player::Opponent) if step + 1 < steps => {
                    let tail = state.opponent_lengths.sum_where(|l| l >= element);
                    let small = u32::try_from(*set).is_ok_and(|n| tail < Dyadic::pow2_neg(n));
                    if *element > set.saturating_mul(2) && small {
                        existence.qualifying.insert(*set);
                    }
                }
                _ => {}
            }
        }
        if mv.player == Player::Us {
            match variant {
                Variant::Existence if existence.cover_failure.is_none() => {
                    for (&n, mu) in state.opponent_lengths.entries() {
                        if state.ours_on_prefix(n) < *mu {
                            existence.cover_failure = Some((step, n));
                            break;
                        }
                    }
                }
                Variant::Lowness { .. } => {
                    objects_ok &= state.our_objects.total() <= state.our_lengths.total();
                    lengths_ok &= *state.our_lengths.total() <= Dyadic::one();
                }
                _ => {}
            }
        }
    }

    let mut r = AuditReport::default();
    r.push("variant", variant.name());
    r.push(
        "declared_c",
        variant.declared_c().map_or("none".to_string(), |c| c.to_string()),
    );
    r.push("steps", steps);
    r.push("horizon", trace.header.horizon);
    r.push(
        "violation",
        violation.as_ref().map_or("none".to_string(), |v| v.to_string()),
    );
    let budget_broken = violation.as_ref().is_some_and(|v| v.kind == ViolationKind::Budget);
    r.push("budgets_respected", !budget_broken);
    r.push("path_stable_since", state.path.stable_since_all());
    r.push("path_ones", state.path.ones().len());
    r.push("our_lengths_total", state.our_lengths.total());
    r.push("our_nodes_total", state.our_nodes.total());
    r.push("our_objects_total", state.our_objects.total());
    r.push("opponent_lengths_total", state.opponent_lengths.total());
    r.push("opponent_nodes_total", state.opponent_nodes.total());
    r.push("w_size", state.w.len());

    let ours = match variant {
        Variant::Existence => existence_report(&mut r, &state, &existence),
        Variant::Incompleteness { .. } => {
            let matching = matching_report(&mut r, &state, variant);
            incompleteness_report(&mut r, &state, variant, &procs, opts, matching)
        }
        Variant::Lowness { .. } => {
            let matching = matching_report(&mut r, &state, variant);
            r.push("objects_within_lengths_every_step", objects_ok);
            r.push("lengths_within_one_every_step", lengths_ok);
            lowness_report(&mut r, &state, variant, &procs, matching)
        }
    };
    r.push("process_problems", procs.problems.len());
    if let Some(first) = procs.problems.first() {
        r.push("first_process_problem", first);
    }
    let verdict = if violation.is_some() {
        Verdict::Violation
    } else if ours {
        Verdict::Ours
    } else {
        Verdict::Opponent
    };
    r.push("verdict", verdict.as_str());
    Ok(r)
}

fn existence_report(r: &mut AuditReport, state: &GameState, checks: &ExistenceChecks) -> bool {
    let covers = checks.cover_failure.is_none();
    r.push("nu_covers_mu_after_our_moves", covers);
    if let Some((step, n)) = checks.cover_failure {
        r.push("nu_covers_mu_first_failure", format!("{step}:{n}"));
    }
    let handled: Dyadic = checks
        .handled
        .iter()
        .filter_map(|&n| u32::try_from(n).ok())
        .map(Dyadic::pow2_neg)
        .sum();
    let bound = state.opponent_lengths.total() + &handled;
    let within = *state.our_nodes.total() <= bound && bound <= Dyadic::from_int(2);
    r.push("nu_bound", &bound);
    r.push("nu_within_bound", within);
    let a = state.path.ones();
    let hits = checks
        .qualifying
        .iter()
        .filter(|n| state.w_sets.get(n).is_some_and(|w| w.iter().any(|u| a.contains(u))))
        .count();
    let simple = hits == checks.qualifying.len();
    r.push("simplicity_qualifying", checks.qualifying.len());
    r.push("simplicity_met", hits);
    r.push("simplicity_holds", simple);
    let coinfinite = (1..=64u64).all(|n| a.range(..2 * n).count() as u64 <= n);
    r.push("coinfinite_holds", coinfinite);
    let listed: Vec<String> = a.iter().map(u64::to_string).collect();
    r.push("a_elements", listed.join(","));
    covers && within && simple && coinfinite
}

/// Strict matching of every length we weighted, on the final path.
fn matching_report(r: &mut AuditReport, state: &GameState, variant: &Variant) -> bool {
    let mut first_failure = None;
    let mut best: Option<BigRational> = None;
    for (&len, ours) in state.our_lengths.entries() {
        if ours.is_zero() {
            continue;
        }
        let theirs = state.opponent_on_prefix(len);
        if theirs <= *ours && first_failure.is_none() {
            first_failure = Some(len);
        }
        let q = ratio(&theirs, ours);
        if best.as_ref().is_none_or(|b| q < *b) {
            best = Some(q);
        }
    }
    let holds = first_failure.is_none();
    r.push("matching_holds", holds);
    r.push(
        "matching_first_failure",
        first_failure.map_or("none".into(), |l| l.to_string()),
    );
    r.push("matching_constant", best.map_or("none".into(), |q| format_ratio(&q)));
    r.push("horizon_relative", variant.declared_c().is_none());
    let spend = state.opponent_nodes.total();
    r.push("opponent_spend", spend);
    let within = variant
        .declared_c()
        .map(|c| spend.to_ratio() <= c.times(state.our_lengths.budget()));
    r.push(
        "opponent_within_c",
        within.map_or("unbounded".into(), |w| w.to_string()),
    );
    let c_ok = within.unwrap_or(true);
    holds && c_ok
}

fn incompleteness_report(
    r: &mut AuditReport,
    state: &GameState,
    variant: &Variant,
    procs: &Processes,
    opts: &AuditOptions,
    opponent_matches: bool,
) -> bool {
    let machine = variant.machine().expect("incompleteness variant has a machine");
    let mut agree = 0;
    let mut disagree = Vec::new();
    let mut inconclusive = 0;
    let mut reduction: BTreeMap<u64, Option<bool>> = BTreeMap::new();
    for p in procs.procs.values() {
        let Some(m) = p.spawn.reserved else { continue };
        let eval = evaluate_on_path(machine.as_ref(), m, &state.path, opts.gamma_steps);
        let verdict = match eval {
            Evaluation::Output { bit, .. } => Some(bit == state.w.contains(&m)),
            Evaluation::Pending => None,
        };
        reduction.insert(m, verdict);
    }
    for (&m, v) in &reduction {
        let word = match v {
            Some(true) => {
                agree += 1;
                "agree"
            }
            Some(false) => {
                disagree.push(m);
                "disagree"
            }
            None => {
                inconclusive += 1;
                "inconclusive"
            }
        };
        r.push(format!("reduction.{m}"), word);
    }
    let reduction_holds = if !disagree.is_empty() {
        "false"
    } else if inconclusive > 0 {
        "inconclusive"
    } else {
        "true"
    };
    r.push("reduction_agree", agree);
    r.push("reduction_disagree", disagree.len());
    r.push("reduction_inconclusive", inconclusive);
    r.push("reduction_holds", reduction_holds);

    let mut failing = Vec::new();
    let mut checked = 0;
    for (id, p) in &procs.procs {
        if p.status == ProcStatus::Terminated || !state.path.extends(&p.spawn.root) {
            continue;
        }
        checked += 1;
        let reduction_fails = p.spawn.reserved.is_some_and(|m| reduction.get(&m) != Some(&Some(true)));
        if reduction_fails || unmatched_in_pool(state, &p.spawn.lengths) || exceeds_scaled(state, &p.spawn) {
            continue;
        }
        failing.push(id.to_string());
    }
    r.push("four_alternatives_checked", checked);
    r.push("four_alternatives_holds", failing.is_empty());
    r.push(
        "four_alternatives_failing",
        if failing.is_empty() {
            "none".into()
        } else {
            failing.join(",")
        },
    );
    r.push("pool_discipline_holds", procs.problems.is_empty());
    let opponent_wins = opponent_matches && reduction_holds == "true";
    !opponent_wins && procs.problems.is_empty()
}

fn unmatched_in_pool(state: &GameState, pool: &LengthPool) -> bool {
    state
        .our_lengths
        .entries()
        .iter()
        .any(|(&len, ours)| pool.contains(len) && !ours.is_zero() && state.opponent_on_prefix(len) <= *ours)
}

/// Opponent weight on nodes above the root at lengths in the pool, compared
/// with `k·α`.
fn opponent_in_subtree(state: &GameState, root: &Node, pool: &LengthPool) -> Dyadic {
    state
        .opponent_nodes
        .entries()
        .range(root.clone()..)
        .take_while(|(v, _)| root.is_prefix_of(v))
        .filter(|(v, _)| pool.contains(v.len()))
        .map(|(_, w)| w)
        .sum()
}

fn exceeds_scaled(state: &GameState, spawn: &Spawn) -> bool {
    let Ok(k) = spawn.coef.parse::<Coef>() else {
        return false;
    };
    let spent = opponent_in_subtree(state, &spawn.root, &spawn.lengths);
    spent.to_ratio() > k.times(&spawn.budget)
}

fn lowness_report(
    r: &mut AuditReport,
    state: &GameState,
    variant: &Variant,
    procs: &Processes,
    opponent_matches: bool,
) -> bool {
    let labels = variant.labels().expect("lowness variant has labels");
    let global_stop = procs
        .procs
        .values()
        .any(|p| p.spawn.parent.is_none() && p.status == ProcStatus::Halted);
    r.push("global_stop", global_stop);
    let golden = procs
        .procs
        .iter()
        .filter(|(_, p)| p.status == ProcStatus::Live && state.path.extends(&p.spawn.root))
        .min_by(|(a_id, a), (b_id, b)| {
            b.spawn
                .depth
                .cmp(&a.spawn.depth)
                .then(a.spawn.root.len().cmp(&b.spawn.root.len()))
                .then(a_id.cmp(b_id))
        })
        .filter(|_| !global_stop);
    let star = match golden {
        None => {
            r.push("golden_run", "none");
            false
        }
        Some((id, p)) => {
            r.push("golden_run", id);
            r.push("golden_root", &p.spawn.root);
            let root = &p.spawn.root;
            let mut mass: BTreeMap<u64, Dyadic> = BTreeMap::new();
            let mut skipped = BTreeSet::new();
            for (v, label) in labels.iter() {
                if !state.path.extends(v) {
                    continue;
                }
                if root.is_prefix_of(v) {
                    *mass.entry(label.object).or_insert_with(Dyadic::zero) += &label.eta;
                } else {
                    skipped.insert(label.object);
                }
            }
            // requests below the golden root are covered by averaging
            // with an everywhere-positive semimeasure
            skipped.retain(|i| !mass.contains_key(i));
            r.push("golden_skipped_objects", skipped.len());
            let constant = mass.iter().map(|(i, m)| ratio(&state.our_objects.get(i), m)).min();
            match constant {
                None => {
                    r.push("golden_constant", "vacuous");
                    true
                }
                Some(k) => {
                    r.push("golden_constant", format_ratio(&k));
                    !k.is_zero()
                }
            }
        }
    };
    r.push("star_exceeds", star);
    (star || !opponent_matches) && procs.problems.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::engine::run;
    use crate::strategy::NoOp;

    #[test]
    fn report_text_round_trips() {
        let mut r = AuditReport::default();
        r.push("a", 1);
        r.push("b", "x=y");
        assert_eq!(AuditReport::parse(&r.to_text()).unwrap(), r);
        assert_eq!(r.get("b"), Some("x=y"));
    }

    #[test]
    fn idle_existence_run() {
        let v = Variant::Existence;
        let t = run(&v, Dyadic::from_int(2), Dyadic::one(), &mut NoOp, &mut NoOp, 10);
        let r = audit(&t, &v, &AuditOptions::default()).unwrap();
        assert_eq!(r.get("path_stable_since"), Some("0"));
        assert_eq!(r.get("our_nodes_total"), Some("0"));
        assert_eq!(r.verdict(), Verdict::Ours);
        assert!(audit(
            &t,
            &Variant::Lowness {
                c: None,
                labels: Default::default()
            },
            &AuditOptions::default()
        )
        .is_err());
    }
}
