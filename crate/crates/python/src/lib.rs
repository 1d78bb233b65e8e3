//! Python bindings: run the analyzer on C source and work with abstract
//! states directly.

use std::collections::BTreeMap;
use std::sync::Arc;

use canalyzer::cfg::{build_cfg, dump_cfg};
use canalyzer::checks;
use canalyzer::domains::bound::Bound as Limit;
use canalyzer::domains::{DomainElem, DomainKind, VarEnv};
use canalyzer::engine::{analyze_source, AnalysisResult, EngineConfig};
use canalyzer::frontend::ast::{BinaryOp, Expr, ExprKind};
use canalyzer::frontend::types::{CType, SourceLoc};
use canalyzer::frontend::{self, pretty};
use canalyzer::normalizer::normalize;
use canalyzer::report::{emit_report, Format};
use canalyzer::Rational;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

create_exception!(canalyzer_py, AnalysisError, PyException);

fn domain(name: &str) -> PyResult<DomainKind> {
    name.parse().map_err(PyValueError::new_err)
}

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn int_env(vars: &[String]) -> Arc<VarEnv> {
    VarEnv::new(vars.iter().map(|v| (v.clone(), CType::INT)).collect())
}

fn rational(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn bound_to_py<'py>(py: Python<'py>, b: &Limit) -> PyResult<Bound<'py, PyAny>> {
    match b {
        Limit::NegInf => Ok(f64::NEG_INFINITY.into_pyobject(py)?.into_any()),
        Limit::PosInf => Ok(f64::INFINITY.into_pyobject(py)?.into_any()),
        Limit::Finite(q) if q.is_integer() => py.import("builtins")?.getattr("int")?.call1((q.to_string(),)),
        Limit::Finite(q) => py.import("fractions")?.getattr("Fraction")?.call1((q.to_string(),)),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.getattr("loads")?.call1((s,))
}

/// An abstract state of one of the three domains.
#[pyclass(module = "canalyzer_py", name = "State", frozen)]
pub struct State {
    elem: DomainElem,
}

fn state(r: Result<DomainElem, canalyzer::domains::DomainError>) -> PyResult<State> {
    r.map(|elem| State { elem }).map_err(value_err)
}

#[pymethods]
impl State {
    #[staticmethod]
    fn top(domain_name: &str, variables: Vec<String>) -> PyResult<State> {
        Ok(State {
            elem: DomainElem::top(domain(domain_name)?, &int_env(&variables)),
        })
    }

    #[staticmethod]
    fn bottom(domain_name: &str, variables: Vec<String>) -> PyResult<State> {
        Ok(State {
            elem: DomainElem::bottom(domain(domain_name)?, &int_env(&variables)),
        })
    }

    /// Best abstraction of a list of integer points, each a dict from
    /// variable name to value.
    #[staticmethod]
    fn from_points(domain_name: &str, variables: Vec<String>, points: Vec<BTreeMap<String, i64>>) -> PyResult<State> {
        let env = int_env(&variables);
        let rows = points
            .iter()
            .map(|p| {
                variables
                    .iter()
                    .map(|v| p.get(v).map(|x| rational(*x)).ok_or_else(|| value_err(format!("point lacks {v}"))))
                    .collect::<PyResult<Vec<_>>>()
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(State {
            elem: DomainElem::alpha_points(domain(domain_name)?, &env, &rows),
        })
    }

    /// A box: each variable maps to `(lo, hi)`, with `None` for an
    /// unbounded side.
    #[staticmethod]
    fn from_box(domain_name: &str, bounds: BTreeMap<String, (Option<i64>, Option<i64>)>) -> PyResult<State> {
        let kind = domain(domain_name)?;
        let vars: Vec<String> = bounds.keys().cloned().collect();
        let env = int_env(&vars);
        let mut elem = DomainElem::top(kind, &env);
        for (v, (lo, hi)) in &bounds {
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(value_err(format!("empty range for {v}")));
                }
            }
            elem = restrict(&elem, v, *lo, *hi);
        }
        Ok(State { elem })
    }

    #[getter]
    fn domain(&self) -> String {
        self.elem.kind().to_string()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.elem.env().vars().iter().map(|(n, _)| n.clone()).collect()
    }

    fn is_bottom(&self) -> bool {
        self.elem.is_bottom()
    }

    /// `(lo, hi)` of one variable, or `None` on bottom. Infinite sides are
    /// floats, finite ones ints or fractions.
    fn interval<'py>(&self, py: Python<'py>, var: &str) -> PyResult<Option<(Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
        if self.elem.env().index(var).is_none() {
            return Err(value_err(format!("unknown variable {var}")));
        }
        match self.elem.project(var) {
            None => Ok(None),
            Some(i) => Ok(Some((bound_to_py(py, &i.lo)?, bound_to_py(py, &i.hi)?))),
        }
    }

    fn contains(&self, point: BTreeMap<String, i64>) -> PyResult<bool> {
        let row = self
            .variables()
            .iter()
            .map(|v| point.get(v).map(|x| rational(*x)).ok_or_else(|| value_err(format!("point lacks {v}"))))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(self.elem.contains(&row))
    }

    fn leq(&self, other: &State) -> PyResult<bool> {
        self.elem.leq(&other.elem).map_err(value_err)
    }

    fn join(&self, other: &State) -> PyResult<State> {
        state(self.elem.join(&other.elem))
    }

    fn meet(&self, other: &State) -> PyResult<State> {
        state(self.elem.meet(&other.elem))
    }

    fn widen(&self, other: &State) -> PyResult<State> {
        state(self.elem.widen(&other.elem))
    }

    /// Raises `ValueError` when `other` is not below this state.
    fn narrow(&self, other: &State) -> PyResult<State> {
        state(self.elem.narrow(&other.elem))
    }

    fn __eq__(&self, other: &State) -> bool {
        self.elem.equivalent(&other.elem).unwrap_or(false)
    }

    fn __le__(&self, other: &State) -> PyResult<bool> {
        self.leq(other)
    }

    fn __str__(&self) -> String {
        if self.elem.is_bottom() {
            "bottom".into()
        } else {
            self.elem.render()
        }
    }

    fn __repr__(&self) -> String {
        format!("<State {}: {}>", self.elem.kind(), self.__str__().replace('\n', ", "))
    }
}

/// Assumes `lo <= var <= hi` through synthetic comparisons, so each domain
/// refines with its own condition transfer.
fn restrict(elem: &DomainElem, var: &str, lo: Option<i64>, hi: Option<i64>) -> DomainElem {
    let loc = SourceLoc::new("<box>".into(), 1, 1);
    let cmp = |op: BinaryOp, k: i64| {
        let l = Expr::var(var, CType::INT, loc.clone());
        let r = Expr::int(k.into(), CType::INT, loc.clone());
        Expr::typed(ExprKind::Binary(op, Box::new(l), Box::new(r)), CType::INT, loc.clone())
    };
    let mut out = elem.clone();
    if let Some(h) = hi {
        out = out.assume(&cmp(BinaryOp::Le, h), true);
    }
    if let Some(l) = lo {
        out = out.assume(&cmp(BinaryOp::Ge, l), true);
    }
    out
}

/// The result of analyzing one function.
#[pyclass(module = "canalyzer_py", name = "Analysis", frozen)]
pub struct Analysis {
    inner: AnalysisResult,
}

#[pymethods]
impl Analysis {
    #[getter]
    fn function(&self) -> String {
        self.inner.function.clone()
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.config.domain.to_string()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.env.vars().iter().map(|(n, _)| n.clone()).collect()
    }

    /// Block numbers in visit order (the entry has the highest number, the
    /// exit is 0).
    fn blocks(&self) -> Vec<usize> {
        self.inner.cfg.block_list.iter().map(|b| self.inner.cfg.display_id(*b)).collect()
    }

    /// State at the entry of the block with this number.
    fn entry(&self, block: usize) -> PyResult<State> {
        if block >= self.inner.cfg.blocks.len() {
            return Err(value_err(format!("no block {block}")));
        }
        Ok(State {
            elem: self.inner.entry_state(self.inner.block_by_display_id(block)).clone(),
        })
    }

    fn exit_state(&self) -> State {
        State {
            elem: self.inner.exit_state().clone(),
        }
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let items = self.inner.diagnostics.iter().map(|d| json_to_py(py, d)).collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, items)
    }

    fn verdicts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let items = self.inner.verdicts.iter().map(|v| json_to_py(py, v)).collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, items)
    }

    fn exit_code(&self) -> i32 {
        checks::exit_code(&self.inner.diagnostics, &self.inner.verdicts)
    }

    #[pyo3(signature = (format = "text", trace = false))]
    fn report(&self, format: &str, trace: bool) -> PyResult<String> {
        let f = match format {
            "text" => Format::Text,
            "json" => Format::Json,
            other => return Err(value_err(format!("unknown format {other}"))),
        };
        Ok(emit_report(std::slice::from_ref(&self.inner), f, trace))
    }

    fn __repr__(&self) -> String {
        format!("<Analysis {} ({})>", self.inner.function, self.inner.config.domain)
    }
}

/// Analyzes every function of a C translation unit.
#[pyfunction]
#[pyo3(signature = (source, domain = "interval", unroll = 5, narrow = 2, max_sweeps = 1000, filename = "<input>"))]
fn analyze(
    source: &str,
    domain: &str,
    unroll: u32,
    narrow: u32,
    max_sweeps: u32,
    filename: &str,
) -> PyResult<Vec<Analysis>> {
    if unroll == 0 || max_sweeps == 0 {
        return Err(value_err("unroll and max_sweeps must be at least 1"));
    }
    let config = EngineConfig {
        domain: self::domain(domain)?,
        num_unrollings: unroll,
        narrowing_iterations: narrow,
        max_fixpoint_sweeps: max_sweeps,
    };
    let results = analyze_source(source, filename, &config).map_err(|e| AnalysisError::new_err(e.to_string()))?;
    Ok(results.into_iter().map(|inner| Analysis { inner }).collect())
}

/// The program after normalization, as C text.
#[pyfunction]
#[pyo3(signature = (source, filename = "<input>"))]
fn normalized(source: &str, filename: &str) -> PyResult<String> {
    let program = frontend::compile(source, filename).map_err(|e| AnalysisError::new_err(e.to_string()))?;
    let mut out = String::new();
    for f in program.functions {
        let nf = normalize(f).map_err(|e| AnalysisError::new_err(e.to_string()))?;
        out.push_str(&pretty::function(&nf, Default::default()));
    }
    Ok(out)
}

/// Text dump of every function's control-flow graph.
#[pyfunction(name = "cfg")]
#[pyo3(signature = (source, filename = "<input>"))]
fn cfg_dump(source: &str, filename: &str) -> PyResult<String> {
    let program = frontend::compile(source, filename).map_err(|e| AnalysisError::new_err(e.to_string()))?;
    let mut out = String::new();
    for f in program.functions {
        let nf = normalize(f).map_err(|e| AnalysisError::new_err(e.to_string()))?;
        let g = build_cfg(&nf).map_err(|e| AnalysisError::new_err(e.to_string()))?;
        out.push_str(&dump_cfg(&g));
    }
    Ok(out)
}

#[pymodule]
pub fn canalyzer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<Analysis>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(normalized, m)?)?;
    m.add_function(wrap_pyfunction!(cfg_dump, m)?)?;
    m.add("AnalysisError", m.py().get_type::<AnalysisError>())?;
    Ok(())
}
