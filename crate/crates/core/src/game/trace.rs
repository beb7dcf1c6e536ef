//! Line-delimited JSON traces: a header line, one record per action (or
//! per pass), and an end line.

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::TraceError;
use crate::node::Node;

use super::engine::Violation;
use super::moves::{Action, Move, Note, Player, TaggedAction};
use super::variant::Variant;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub variant: String,
    pub c: Option<String>,
    pub our_budget: Dyadic,
    pub opponent_budget: Dyadic,
    pub horizon: u64,
    pub machine: Option<String>,
}

impl TraceHeader {
    pub fn new(variant: &Variant, our_budget: &Dyadic, opponent_budget: &Dyadic, horizon: u64) -> Self {
        Self {
            variant: variant.name().to_string(),
            c: variant.declared_c().map(|c| c.to_string()),
            our_budget: our_budget.clone(),
            opponent_budget: opponent_budget.clone(),
            horizon,
            machine: variant.machine().map(|m| m.describe()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEnd {
    pub steps: u64,
    pub violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub moves: Vec<Move>,
    pub end: TraceEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Record {
    step: u64,
    player: Player,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Dyadic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elem: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    proc: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<Note>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header { header: TraceHeader },
    End { end: TraceEnd },
    Record(Record),
}

impl Record {
    fn from_action(step: u64, player: Player, tagged: &TaggedAction) -> Self {
        let mut r = Record {
            step,
            player,
            kind: tagged.action.kind().to_string(),
            key: None,
            delta: None,
            elem: None,
            proc: tagged.proc,
            note: None,
        };
        match &tagged.action {
            Action::Length { length, delta } | Action::Object { object: length, delta } => {
                r.key = Some(length.to_string());
                r.delta = Some(delta.clone());
            }
            Action::Node { node, delta } => {
                r.key = Some(node.to_string());
                r.delta = Some(delta.clone());
            }
            Action::Flip { index } => r.key = Some(index.to_string()),
            Action::Enumerate { set, element } => {
                r.key = Some(set.to_string());
                r.elem = Some(*element);
            }
            Action::InsertW { element } => r.elem = Some(*element),
            Action::Note(note) => r.note = Some(note.clone()),
        }
        r
    }

    fn to_action(&self, line: usize) -> Result<Option<TaggedAction>, TraceError> {
        let bad = |message: &str| TraceError::Malformed {
            line,
            message: message.to_string(),
        };
        let key = || self.key.as_deref().ok_or_else(|| bad("missing key"));
        let num = || key()?.parse::<u64>().map_err(|_| bad("key is not a number"));
        let delta = || self.delta.clone().ok_or_else(|| bad("missing delta"));
        let elem = || self.elem.ok_or_else(|| bad("missing elem"));
        let action = match self.kind.as_str() {
            "pass" => return Ok(None),
            "length" => Action::Length {
                length: num()?,
                delta: delta()?,
            },
            "object" => Action::Object {
                object: num()?,
                delta: delta()?,
            },
            "node" => Action::Node {
                node: key()?.parse::<Node>().map_err(|_| bad("bad node"))?,
                delta: delta()?,
            },
            "flip" => Action::Flip { index: num()? },
            "enumerate" => Action::Enumerate {
                set: num()?,
                element: elem()?,
            },
            "insert_w" => Action::InsertW { element: elem()? },
            "note" => Action::Note(self.note.clone().ok_or_else(|| bad("missing note"))?),
            other => return Err(bad(&format!("unknown kind {other:?}"))),
        };
        Ok(Some(TaggedAction {
            action,
            proc: self.proc,
        }))
    }
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("trace lines serialize"));
            out.push('\n');
        };
        push(&Line::Header {
            header: self.header.clone(),
        });
        for (step, mv) in self.moves.iter().enumerate() {
            let step = step as u64;
            if mv.actions.is_empty() {
                push(&Line::Record(Record {
                    step,
                    player: mv.player,
                    kind: "pass".into(),
                    key: None,
                    delta: None,
                    elem: None,
                    proc: None,
                    note: None,
                }));
            }
            for a in &mv.actions {
                push(&Line::Record(Record::from_action(step, mv.player, a)));
            }
        }
        push(&Line::End { end: self.end.clone() });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceError> {
        let mut header = None;
        let mut end = None;
        let mut moves: Vec<Move> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let bad = |message: String| TraceError::Malformed { line: no, message };
            if end.is_some() {
                return Err(bad("content after end line".into()));
            }
            let line: Line = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
            match line {
                Line::Header { header: h } => {
                    if header.is_some() || !moves.is_empty() {
                        return Err(bad("header must be the first line".into()));
                    }
                    header = Some(h);
                }
                Line::End { end: e } => end = Some(e),
                Line::Record(r) => {
                    if header.is_none() {
                        return Err(bad("record before header".into()));
                    }
                    let action = r.to_action(no)?;
                    let next = moves.len() as u64;
                    if r.step + 1 == next {
                        let mv = moves.last_mut().expect("non-empty");
                        if mv.player != r.player || mv.actions.is_empty() || action.is_none() {
                            return Err(bad(format!("inconsistent records for step {}", r.step)));
                        }
                        mv.actions.extend(action);
                    } else if r.step == next {
                        moves.push(Move {
                            player: r.player,
                            actions: action.into_iter().collect(),
                        });
                    } else {
                        return Err(bad(format!("step {} out of sequence", r.step)));
                    }
                }
            }
        }
        let header = header.ok_or(TraceError::Malformed {
            line: 1,
            message: "missing header".into(),
        })?;
        let end = end.ok_or(TraceError::Malformed {
            line: text.lines().count(),
            message: "missing end line".into(),
        })?;
        if end.steps != moves.len() as u64 {
            return Err(TraceError::Malformed {
                line: text.lines().count(),
                message: format!("end line claims {} steps, found {}", end.steps, moves.len()),
            });
        }
        Ok(Trace { header, moves, end })
    }
}
