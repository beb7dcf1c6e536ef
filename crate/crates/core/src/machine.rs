//! Oracle machines `Γ`: step-bounded, monotone partial maps from an input
//! and an oracle sequence to a single output bit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::LoadError;
use crate::node::Node;
use crate::path::PathApprox;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    /// Converged; `queries` lists the oracle positions read, in order.
    Output { bit: bool, queries: Vec<u64> },
    /// No output within the step bound, or a query fell outside the oracle
    /// prefix that was supplied.
    Pending,
}

impl Evaluation {
    pub fn bit(&self) -> Option<bool> {
        match self {
            Evaluation::Output { bit, .. } => Some(*bit),
            Evaluation::Pending => None,
        }
    }

    /// One past the largest position read.
    pub fn query_extent(&self) -> u64 {
        match self {
            Evaluation::Output { queries, .. } => queries.iter().map(|q| q + 1).max().unwrap_or(0),
            Evaluation::Pending => 0,
        }
    }
}

/// An oracle answers `None` when the position is outside what it knows;
/// the machine must then report `Pending`.
pub type Oracle<'a> = dyn FnMut(u64) -> Option<bool> + 'a;

pub trait OracleMachine: fmt::Debug + Send + Sync {
    fn run(&self, input: u64, oracle: &mut Oracle<'_>, steps: u64) -> Evaluation;

    /// Short text form, also accepted by [`parse_machine`] for built-ins.
    fn describe(&self) -> String;
}

/// Runs `machine` with the oracle restricted to the bits of `prefix`.
pub fn evaluate(machine: &dyn OracleMachine, input: u64, prefix: &Node, steps: u64) -> Evaluation {
    let mut oracle = |i: u64| (i < prefix.len()).then(|| prefix.bit(i));
    machine.run(input, &mut oracle, steps)
}

/// Runs `machine` against the full current sequence.
pub fn evaluate_on_path(machine: &dyn OracleMachine, input: u64, path: &PathApprox, steps: u64) -> Evaluation {
    let mut oracle = |i: u64| Some(path.bit(i));
    machine.run(input, &mut oracle, steps)
}

/// `Γ^a(m) = 1 - a(m + shift)`, one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complement {
    pub shift: u64,
}

impl OracleMachine for Complement {
    fn run(&self, input: u64, oracle: &mut Oracle<'_>, steps: u64) -> Evaluation {
        if steps == 0 {
            return Evaluation::Pending;
        }
        let q = input + self.shift;
        match oracle(q) {
            Some(b) => Evaluation::Output {
                bit: !b,
                queries: vec![q],
            },
            None => Evaluation::Pending,
        }
    }

    fn describe(&self) -> String {
        format!("complement:{}", self.shift)
    }
}

/// Diverges everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Never;

impl OracleMachine for Never {
    fn run(&self, _: u64, _: &mut Oracle<'_>, _: u64) -> Evaluation {
        Evaluation::Pending
    }

    fn describe(&self) -> String {
        "never".into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub input: u64,
    pub prefix: Node,
    pub output: bool,
}

/// A machine given by finitely many `(m, oracle prefix, output)` rows.
///
/// On input `m` it reads the oracle one bit per step and answers as soon as
/// the bits read so far equal the prefix of some row for `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMachine {
    rows: BTreeMap<u64, Vec<(Node, bool)>>,
    source: String,
}

impl TableMachine {
    /// Rejects tables in which two comparable prefixes for the same input
    /// disagree on the output.
    pub fn new(rows: Vec<TableRow>) -> Result<Self, LoadError> {
        let mut by_input: BTreeMap<u64, Vec<(Node, bool)>> = BTreeMap::new();
        for row in rows {
            let list = by_input.entry(row.input).or_default();
            for (p, out) in list.iter() {
                let comparable = p.is_prefix_of(&row.prefix) || row.prefix.is_prefix_of(p);
                if comparable && *out != row.output {
                    return Err(LoadError::Inconsistent(format!(
                        "input {}: prefixes {} and {} disagree",
                        row.input, p, row.prefix
                    )));
                }
            }
            list.push((row.prefix, row.output));
        }
        for list in by_input.values_mut() {
            list.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        Ok(Self {
            rows: by_input,
            source: "table".into(),
        })
    }

    /// One row per line: `m prefix output`, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut rows = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| LoadError::Syntax {
                line: no + 1,
                message: what.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [m, prefix, out] = fields[..] else {
                return Err(bad("expected `m prefix output`"));
            };
            let input = m.parse().map_err(|_| bad("bad input number"))?;
            let prefix = prefix.parse().map_err(|_| bad("bad prefix"))?;
            let output = match out {
                "0" => false,
                "1" => true,
                _ => return Err(bad("output must be 0 or 1")),
            };
            rows.push(TableRow { input, prefix, output });
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        let mut table = Self::parse(&text)?;
        table.source = format!("table:{}", path.display());
        Ok(table)
    }

    pub fn rows(&self) -> impl Iterator<Item = TableRow> + '_ {
        self.rows.iter().flat_map(|(&input, list)| {
            list.iter().map(move |(prefix, output)| TableRow {
                input,
                prefix: prefix.clone(),
                output: *output,
            })
        })
    }
}

impl OracleMachine for TableMachine {
    fn run(&self, input: u64, oracle: &mut Oracle<'_>, steps: u64) -> Evaluation {
        let Some(list) = self.rows.get(&input) else {
            return Evaluation::Pending;
        };
        let longest = list.iter().map(|(p, _)| p.len()).max().unwrap_or(0);
        let mut read: Vec<bool> = Vec::new();
        let mut candidates: Vec<&(Node, bool)> = list.iter().collect();
        loop {
            let here = Node::from_bits(&read);
            if let Some((_, out)) = candidates.iter().find(|(p, _)| p.len() == here.len()) {
                return Evaluation::Output {
                    bit: *out,
                    queries: (0..here.len()).collect(),
                };
            }
            let n = read.len() as u64;
            if n >= longest || n >= steps {
                return Evaluation::Pending;
            }
            let Some(b) = oracle(n) else {
                return Evaluation::Pending;
            };
            read.push(b);
            let next = Node::from_bits(&read);
            candidates.retain(|(p, _)| p.len() >= next.len() && next.is_prefix_of(p));
            if candidates.is_empty() {
                return Evaluation::Pending;
            }
        }
    }

    fn describe(&self) -> String {
        self.source.clone()
    }
}

/// `complement[:shift]`, `never`, or `table:<path>` (relative paths resolve
/// against `base`).
pub fn parse_machine(source: &str, base: &Path) -> Result<Arc<dyn OracleMachine>, LoadError> {
    let source = source.trim();
    if source == "never" {
        return Ok(Arc::new(Never));
    }
    if source == "complement" {
        return Ok(Arc::new(Complement { shift: 0 }));
    }
    if let Some(shift) = source.strip_prefix("complement:") {
        let shift = shift
            .parse()
            .map_err(|_| LoadError::Value(format!("bad complement shift {shift:?}")))?;
        return Ok(Arc::new(Complement { shift }));
    }
    if let Some(path) = source.strip_prefix("table:") {
        return Ok(Arc::new(TableMachine::load(&base.join(path))?));
    }
    Err(LoadError::Value(format!("unknown machine {source:?}")))
}

/// Every node of length at most `depth` that forces output 0 on `input`
/// using only its own bits, in shortlex order.
pub fn strong_strings(machine: &dyn OracleMachine, input: u64, depth: u32, steps: u64) -> Vec<Node> {
    let mut out = Vec::new();
    for len in 0..=depth {
        for u in Node::all_of_length(len) {
            if evaluate(machine, input, &u, steps).bit() == Some(false) {
                out.push(u);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn never_has_no_strong_strings() {
        assert!(strong_strings(&Never, 0, 6, 1000).is_empty());
    }

    #[test]
    fn strong_strings_for_bit_two() {
        let got: Vec<String> = strong_strings(&Complement { shift: 2 }, 0, 3, 10)
            .iter()
            .map(Node::to_string)
            .collect();
        // exhaustive oracle: a length-3 string forces 0 iff its bit 2 is set
        let oracle: Vec<String> = Node::all_of_length(3)
            .filter(|u| u.bit(2))
            .map(|u| u.to_string())
            .collect();
        assert_eq!(got, oracle);
        assert_eq!(got, ["001", "011", "101", "111"]);
    }

    #[test]
    fn strong_strings_monotone_in_depth() {
        let table = TableMachine::parse("0 01 0\n0 1 1\n0 001 0\n").unwrap();
        let shallow = strong_strings(&table, 0, 3, 10);
        let deep = strong_strings(&table, 0, 4, 10);
        for u in &shallow {
            assert!(deep.iter().any(|v| v.is_prefix_of(u)));
        }
    }

    #[test]
    fn table_machine_reads_bitwise() {
        let table = TableMachine::parse("# demo\n0 10 1\n0 11 0\n3 - 1\n").unwrap();
        assert_eq!(evaluate(&table, 0, &n("101"), 10).bit(), Some(true));
        assert_eq!(evaluate(&table, 0, &n("1"), 10), Evaluation::Pending);
        assert_eq!(evaluate(&table, 0, &n("11"), 1), Evaluation::Pending);
        assert_eq!(evaluate(&table, 0, &n("0"), 10), Evaluation::Pending);
        assert_eq!(evaluate(&table, 3, &n("-"), 10).bit(), Some(true));
        assert_eq!(evaluate(&table, 7, &n("111"), 10), Evaluation::Pending);
    }

    #[test]
    fn table_rejects_inconsistent_rows() {
        assert!(TableMachine::parse("0 1 0\n0 10 1\n").is_err());
        assert!(TableMachine::parse("0 1 0\n0 10 0\n").is_ok());
        assert!(TableMachine::parse("0 1 2\n").is_err());
        assert!(TableMachine::parse("0 1\n").is_err());
    }

    #[test]
    fn monotone_under_extension() {
        let table = TableMachine::parse("0 0110 0\n0 111 1\n1 00 1\n").unwrap();
        for len in 0..=5 {
            for u in Node::all_of_length(len) {
                for m in 0..2 {
                    let Evaluation::Output { bit, .. } = evaluate(&table, m, &u, 5) else {
                        continue;
                    };
                    for ext in Node::all_of_length(2) {
                        let v = u.concat(&ext);
                        assert_eq!(evaluate(&table, m, &v, 9).bit(), Some(bit));
                    }
                }
            }
        }
    }

    #[test]
    fn parses_machine_specs() {
        let base = Path::new(".");
        assert_eq!(parse_machine("complement:3", base).unwrap().describe(), "complement:3");
        assert_eq!(parse_machine("never", base).unwrap().describe(), "never");
        assert!(parse_machine("bogus", base).is_err());
        assert!(parse_machine("table:/nonexistent/file", base).is_err());
    }
}
