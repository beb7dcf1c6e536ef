//! Python bindings: exact dyadics, nodes, length pools, the covering
//! tools, and whole game runs driven by config files.

use std::path::PathBuf;

use ktriv::config::RunConfig;
use ktriv::covering::{series_to_open, IntervalSet as CoreIntervalSet, ProductOpenSet as CoreProduct};
use ktriv::dyadic::Dyadic as CoreDyadic;
use ktriv::game::{audit, Trace};
use ktriv::node::Node as CoreNode;
use ktriv::pool::LengthPool as CorePool;
use pyo3::basic::CompareOp;
use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Exact number `m / 2^e`.
#[pyclass(name = "Dyadic", frozen, skip_from_py_object, module = "ktriv_py")]
#[derive(Clone)]
struct Dyadic(CoreDyadic);

#[pymethods]
impl Dyadic {
    /// Parses `"3/8"`, `"0.375"` or an integer.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(Dyadic).map_err(value_err)
    }

    #[staticmethod]
    fn from_parts(mantissa: u64, exponent: u32) -> Self {
        Dyadic(CoreDyadic::from_parts(mantissa, exponent))
    }

    #[staticmethod]
    fn pow2_neg(k: u32) -> Self {
        Dyadic(CoreDyadic::pow2_neg(k))
    }

    fn __add__(&self, other: &Self) -> Self {
        Dyadic(&self.0 + &other.0)
    }

    fn __mul__(&self, other: &Self) -> Self {
        Dyadic(&self.0 * &other.0)
    }

    /// Raises `ValueError` when the result would be negative.
    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_sub(&other.0).map(Dyadic).map_err(value_err)
    }

    fn __richcmp__(&self, other: &Self, op: CompareOp) -> bool {
        op.matches(self.0.cmp(&other.0))
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.0.hash(&mut h);
        h.finish()
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Dyadic('{}')", self.0)
    }

    #[getter]
    fn exponent(&self) -> u32 {
        self.0.exponent()
    }
}

/// A finite binary string.
#[pyclass(name = "Node", frozen, eq, hash, skip_from_py_object, module = "ktriv_py")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Node(CoreNode);

#[pymethods]
impl Node {
    /// `"-"` or `""` is the empty string.
    #[new]
    fn new(bits: &str) -> PyResult<Self> {
        let bits = if bits.is_empty() { "-" } else { bits };
        bits.parse().map(Node).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len() as usize
    }

    fn bits(&self) -> Vec<bool> {
        self.0.bits()
    }

    fn is_prefix_of(&self, other: &Self) -> bool {
        self.0.is_prefix_of(&other.0)
    }

    fn concat(&self, tail: &Self) -> Self {
        Node(self.0.concat(&tail.0))
    }

    fn prefix(&self, n: u64) -> Self {
        Node(self.0.prefix(n.min(self.0.len())))
    }

    fn cylinder_measure(&self) -> Dyadic {
        Dyadic(self.0.cylinder_measure())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Node('{}')", self.0)
    }
}

/// Arithmetic progression of lengths `offset + stride * i`.
#[pyclass(name = "LengthPool", frozen, eq, skip_from_py_object, module = "ktriv_py")]
#[derive(Clone, PartialEq, Eq)]
struct LengthPool(CorePool);

#[pymethods]
impl LengthPool {
    #[new]
    fn new(offset: u64, stride: u64) -> PyResult<Self> {
        CorePool::new(offset, stride).map(LengthPool).map_err(value_err)
    }

    #[staticmethod]
    fn naturals() -> Self {
        LengthPool(CorePool::naturals())
    }

    fn __contains__(&self, x: u64) -> bool {
        self.0.contains(x)
    }

    fn take(&self, n: usize) -> Vec<u64> {
        self.0.iter().take(n).collect()
    }

    fn gamma_part(&self, n: u64) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("parts are numbered from 1"));
        }
        self.0.gamma_part(n).map(LengthPool).map_err(value_err)
    }

    fn split(&self, parts: u64) -> PyResult<Vec<Self>> {
        if parts == 0 {
            return Err(PyZeroDivisionError::new_err("cannot split into zero parts"));
        }
        Ok(self
            .0
            .split(parts)
            .map_err(value_err)?
            .into_iter()
            .map(LengthPool)
            .collect())
    }

    fn intersects(&self, other: &Self) -> bool {
        self.0.intersects(&other.0)
    }

    #[getter]
    fn offset(&self) -> u64 {
        self.0.offset()
    }

    #[getter]
    fn stride(&self) -> u64 {
        self.0.stride()
    }

    fn __repr__(&self) -> String {
        format!("LengthPool({}, {})", self.0.offset(), self.0.stride())
    }
}

fn nodes(items: Vec<String>) -> PyResult<Vec<CoreNode>> {
    items.iter().map(|s| Node::new(s).map(|n| n.0)).collect()
}

/// Finite union of cylinders, normalized.
#[pyclass(name = "IntervalSet", frozen, eq, skip_from_py_object, module = "ktriv_py")]
#[derive(Clone, PartialEq, Eq)]
struct IntervalSet(CoreIntervalSet);

#[pymethods]
impl IntervalSet {
    #[new]
    fn new(prefixes: Vec<String>) -> PyResult<Self> {
        Ok(IntervalSet(CoreIntervalSet::new(nodes(prefixes)?)))
    }

    fn prefixes(&self) -> Vec<String> {
        self.0.prefixes().iter().map(ToString::to_string).collect()
    }

    fn measure(&self) -> Dyadic {
        Dyadic(self.0.measure())
    }

    fn covers(&self, u: &str) -> PyResult<bool> {
        Ok(self.0.covers(&Node::new(u)?.0))
    }

    fn quotient(&self, u: &str) -> PyResult<Self> {
        Ok(IntervalSet(self.0.quotient(&Node::new(u)?.0)))
    }

    /// Pieces of `x`; `ValueError` names the first position no member fits.
    fn decompose_tail(&self, x: &str) -> PyResult<Vec<String>> {
        match self.0.decompose_tail(&Node::new(x)?.0) {
            Ok(pieces) => Ok(pieces.iter().map(ToString::to_string).collect()),
            Err(at) => Err(PyValueError::new_err(format!("no member starts at position {at}"))),
        }
    }

    fn iterated_measure(&self, n: u32) -> Dyadic {
        Dyadic(self.0.iterated_measure(n))
    }

    fn power_below(&self, t: u32) -> Option<u32> {
        self.0.power_below(t)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Open set `{x : x_i < z_i for some i}` in the product of unit intervals.
#[pyclass(name = "ProductOpenSet", frozen, module = "ktriv_py")]
struct ProductOpenSet(CoreProduct);

#[pymethods]
impl ProductOpenSet {
    #[staticmethod]
    fn from_series(a: Vec<PyRef<'_, Dyadic>>) -> PyResult<Self> {
        let a: Vec<CoreDyadic> = a.iter().map(|d| d.0.clone()).collect();
        series_to_open(&a).map(ProductOpenSet).map_err(value_err)
    }

    fn thresholds(&self) -> Vec<Dyadic> {
        self.0.thresholds().iter().cloned().map(Dyadic).collect()
    }

    fn measure(&self) -> Dyadic {
        Dyadic(self.0.measure())
    }

    fn complement_measure(&self) -> Dyadic {
        Dyadic(self.0.complement_measure())
    }

    fn extract_series(&self) -> Vec<Dyadic> {
        self.0.extract_series().into_iter().map(Dyadic).collect()
    }

    fn includes(&self, other: &Self) -> bool {
        self.0.includes(&other.0)
    }
}

fn load(config: PathBuf) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::load(&config).map_err(value_err)?;
    cfg.apply_env();
    Ok(cfg)
}

/// Plays the game in `config` and returns `(trace_jsonl, audit_text,
/// exit_code)`.
#[pyfunction]
#[pyo3(signature = (config, horizon=None, seed=None))]
fn run_game(config: PathBuf, horizon: Option<u64>, seed: Option<u64>) -> PyResult<(String, String, i32)> {
    let mut cfg = load(config)?;
    if let Some(h) = horizon {
        cfg.horizon = h;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (trace, report) = cfg.play().map_err(value_err)?;
    Ok((trace.to_jsonl(), report.to_text(), report.verdict().exit_code()))
}

/// Re-audits a JSONL trace against the variant built from `config`.
#[pyfunction]
fn verify_trace(trace: &str, config: PathBuf) -> PyResult<String> {
    let cfg = load(config)?;
    let trace = Trace::from_jsonl(trace).map_err(value_err)?;
    let variant = cfg.variant().map_err(value_err)?;
    let report = audit(&trace, &variant, &cfg.audit_options()).map_err(value_err)?;
    Ok(report.to_text())
}

#[pymodule]
fn ktriv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dyadic>()?;
    m.add_class::<Node>()?;
    m.add_class::<LengthPool>()?;
    m.add_class::<IntervalSet>()?;
    m.add_class::<ProductOpenSet>()?;
    m.add_function(wrap_pyfunction!(run_game, m)?)?;
    m.add_function(wrap_pyfunction!(verify_trace, m)?)?;
    Ok(())
}
