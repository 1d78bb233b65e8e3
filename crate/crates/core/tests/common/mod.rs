//! Shared test helpers: a concrete interpreter over the CFG and the corpus.

#![allow(dead_code)]

pub mod ast_exec;
pub mod laws;

use std::collections::BTreeMap;
use std::path::PathBuf;

use canalyzer::cfg::{BlockId, Cfg};
use canalyzer::domains::eval::expand_compound;
use canalyzer::domains::{DomainKind, VarEnv};
use canalyzer::engine::{analyze_source, AnalysisResult, EngineConfig};
use canalyzer::frontend::ast::{BinaryOp, CastKind, Expr, ExprKind, LogicalOp, StmtKind, UnaryOp};
use canalyzer::frontend::types::{CType, SourceLoc};
use canalyzer::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const GRID: std::ops::RangeInclusive<i64> = -8..=8;
const STEP_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    /// Division or remainder by zero at this location.
    DivZero(SourceLoc),
    /// Undefined shift or out-of-range float conversion.
    Undefined(SourceLoc),
}

#[derive(Debug, Default)]
pub struct Run {
    /// Store at the entry of every visited block, in environment order.
    pub visits: Vec<(BlockId, Vec<Rational>)>,
    pub asserts: Vec<(SourceLoc, bool)>,
    pub stop: Option<Stop>,
    pub finished: bool,
}

pub(crate) fn int(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub(crate) fn wrap(v: Rational, ty: CType) -> Rational {
    let Some((lo, hi)) = ty.range() else { return v };
    debug_assert!(v.is_integer());
    let m: BigInt = &hi - &lo + 1;
    let r = (v.to_integer() - &lo).mod_floor(&m) + lo;
    Rational::from_integer(r)
}

fn truth(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

pub(crate) struct Machine<'a> {
    pub env: &'a VarEnv,
    pub store: Vec<Rational>,
}

impl Machine<'_> {
    pub fn get(&self, v: &str) -> Rational {
        self.store[self.env.index(v).expect("known variable")].clone()
    }

    /// Stores `val` converted to the variable's type and returns it.
    pub fn set(&mut self, v: &str, val: Rational) -> Rational {
        let i = self.env.index(v).expect("known variable");
        self.store[i] = wrap(val, self.env.ty(i));
        self.store[i].clone()
    }

    fn ty_of(&self, v: &str) -> CType {
        self.env.ty(self.env.index(v).expect("known variable"))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Rational, Stop> {
        let ty = e.ty();
        let fix = |v: Rational| if ty.is_integral() { wrap(v, ty) } else { v };
        Ok(match &e.kind {
            ExprKind::IntLit(v) => int(*v),
            ExprKind::RealLit(q, _) => q.clone(),
            ExprKind::Var(n) => self.get(n),
            ExprKind::Unary(op, inner) => {
                let a = self.eval(inner)?;
                match op {
                    UnaryOp::Plus => a,
                    UnaryOp::Minus => fix(-a),
                    UnaryOp::Not => truth(a.is_zero()),
                    UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec => {
                        let name = inner.as_var().expect("increment of a variable");
                        let step = if matches!(op, UnaryOp::PreInc | UnaryOp::PostInc) { 1 } else { -1 };
                        let new = self.set(name, &a + int(step));
                        if matches!(op, UnaryOp::PreInc | UnaryOp::PreDec) {
                            new
                        } else {
                            a
                        }
                    }
                }
            }
            ExprKind::Binary(op, l, r) => {
                let (a, b) = (self.eval(l)?, self.eval(r)?);
                match op {
                    BinaryOp::Lt => truth(a < b),
                    BinaryOp::Le => truth(a <= b),
                    BinaryOp::Gt => truth(a > b),
                    BinaryOp::Ge => truth(a >= b),
                    BinaryOp::Eq => truth(a == b),
                    BinaryOp::Ne => truth(a != b),
                    BinaryOp::Add => fix(a + b),
                    BinaryOp::Sub => fix(a - b),
                    BinaryOp::Mul => fix(a * b),
                    BinaryOp::Div | BinaryOp::Rem => {
                        if b.is_zero() {
                            return Err(Stop::DivZero(e.loc.clone()));
                        }
                        if ty.is_real() {
                            a / b
                        } else {
                            let q = (&a / &b).trunc();
                            if *op == BinaryOp::Div {
                                fix(q)
                            } else {
                                fix(a - b * q)
                            }
                        }
                    }
                    BinaryOp::Shl | BinaryOp::Shr => {
                        let bits = ty.bits().expect("integral shift") as i64;
                        let n = b.to_integer().to_i64().unwrap_or(-1);
                        if n < 0 || n >= bits || (*op == BinaryOp::Shl && a.is_negative()) {
                            return Err(Stop::Undefined(e.loc.clone()));
                        }
                        let p = Rational::from_integer(BigInt::one() << n as usize);
                        if *op == BinaryOp::Shl {
                            fix(a * p)
                        } else {
                            (a / p).floor()
                        }
                    }
                }
            }
            ExprKind::Logical(op, l, r) => {
                let a = !self.eval(l)?.is_zero();
                match op {
                    LogicalOp::And => truth(a && !self.eval(r)?.is_zero()),
                    LogicalOp::Or => truth(a || !self.eval(r)?.is_zero()),
                }
            }
            ExprKind::Conditional(c, a, b) => {
                if self.eval(c)?.is_zero() {
                    self.eval(b)?
                } else {
                    self.eval(a)?
                }
            }
            ExprKind::Cast { to, kind, operand, .. } => {
                let a = self.eval(operand)?;
                match kind {
                    CastKind::IntegralCast => wrap(a, *to),
                    CastKind::IntegralToFloating | CastKind::FloatingCast => a,
                    CastKind::FloatingToIntegral => {
                        let t = a.trunc();
                        let (lo, hi) = to.range().expect("integral target");
                        if t < Rational::from_integer(lo) || t > Rational::from_integer(hi) {
                            return Err(Stop::Undefined(e.loc.clone()));
                        }
                        t
                    }
                }
            }
            ExprKind::Assign(n, v) => {
                let v = self.eval(v)?;
                self.set(n, v)
            }
            ExprKind::CompoundAssign(op, n, v) => {
                let full = expand_compound(*op, n, self.ty_of(n), v, &e.loc);
                let v = self.eval(&full)?;
                self.set(n, v)
            }
        })
    }
}

/// Variables declared without an initializer anywhere in the graph.
pub fn inputs(cfg: &Cfg) -> Vec<String> {
    let mut out = Vec::new();
    for b in &cfg.blocks {
        for s in &b.statements {
            if let StmtKind::Decl { name, init: None, .. } = &s.kind {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
        }
    }
    out
}

/// Executes the graph once. Uninitialized declarations take the value given
/// in `input` (wrapped into the variable's type); every other variable
/// starts at zero.
pub fn execute(cfg: &Cfg, env: &VarEnv, input: &BTreeMap<String, i64>) -> Run {
    let init_of = |i: usize| {
        let v = input.get(env.name(i)).copied().unwrap_or(0);
        wrap(int(v as i128), env.ty(i))
    };
    let mut m = Machine {
        env,
        store: (0..env.len()).map(init_of).collect(),
    };
    let mut run = Run::default();
    let mut b = cfg.entry;
    for _ in 0..STEP_LIMIT {
        run.visits.push((b, m.store.clone()));
        let blk = cfg.block(b);
        for s in &blk.statements {
            let r = match &s.kind {
                StmtKind::Decl { name, init: Some(e), .. } => m.eval(e).map(|v| {
                    m.set(name, v);
                }),
                StmtKind::Decl { name, init: None, .. } => {
                    let i = env.index(name).expect("declared");
                    m.store[i] = init_of(i);
                    Ok(())
                }
                StmtKind::Expr(e) => match &e.kind {
                    ExprKind::Assign(..) | ExprKind::CompoundAssign(..) => m.eval(e).map(|_| ()),
                    _ => Ok(()),
                },
                StmtKind::Assert(c) => m.eval(c).map(|v| run.asserts.push((s.loc.clone(), !v.is_zero()))),
                StmtKind::Return(Some(e)) => m.eval(e).map(|_| ()),
                _ => Ok(()),
            };
            if let Err(stop) = r {
                run.stop = Some(stop);
                return run;
            }
        }
        b = match (&blk.condition, blk.successors.as_slice()) {
            (_, []) => {
                run.finished = true;
                return run;
            }
            (Some(c), [t, f]) => match m.eval(c) {
                Ok(v) if !v.is_zero() => *t,
                Ok(_) => *f,
                Err(stop) => {
                    run.stop = Some(stop);
                    return run;
                }
            },
            (_, [next, ..]) => *next,
        };
    }
    run
}

/// Every assignment of grid values to the inputs.
pub fn grid(names: &[String]) -> Vec<BTreeMap<String, i64>> {
    let mut out = vec![BTreeMap::new()];
    for n in names {
        out = out
            .into_iter()
            .flat_map(|m| {
                GRID.map(move |v| {
                    let mut m = m.clone();
                    m.insert(n.clone(), v);
                    m
                })
            })
            .collect();
    }
    out
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// `(file name, source)` for every corpus program, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("readable"))
        })
        .collect()
}

pub fn config(domain: DomainKind, unroll: u32, narrow: u32) -> EngineConfig {
    EngineConfig {
        domain,
        num_unrollings: unroll,
        narrowing_iterations: narrow,
        ..EngineConfig::default()
    }
}

pub fn analyze(src: &str, domain: DomainKind, unroll: u32, narrow: u32) -> Vec<AnalysisResult> {
    analyze_source(src, "t.c", &config(domain, unroll, narrow)).expect("analysis succeeds")
}

/// Analysis of a `main` whose body is `body`.
pub fn analyze_main(body: &str, domain: DomainKind, unroll: u32, narrow: u32) -> AnalysisResult {
    analyze(&format!("int main() {{ {body} }}"), domain, unroll, narrow).remove(0)
}

/// Runs every grid input through the graph of `r` and returns the first
/// disagreement with the analysis, if any.
pub fn soundness_violation(name: &str, r: &AnalysisResult) -> Option<String> {
    let env = r.env.as_ref();
    let names = inputs(&r.cfg);
    for input in grid(&names) {
        let run = execute(&r.cfg, env, &input);
        for (b, store) in &run.visits {
            if !r.entry_state(*b).contains(store) {
                return Some(format!(
                    "{name}: {}: B{} entry misses {store:?} under {input:?}\n{}",
                    r.config.domain,
                    r.cfg.display_id(*b),
                    r.entry_state(*b).render()
                ));
            }
        }
        for (loc, held) in &run.asserts {
            for v in r.verdicts.iter().filter(|v| &v.assertion_loc == loc) {
                use canalyzer::checks::VerdictResult::*;
                let bad = match v.result {
                    Proven => !held,
                    Violated => *held,
                    Unknown => false,
                };
                if bad {
                    return Some(format!("{name}: {}: verdict {v} contradicted under {input:?}", r.config.domain));
                }
            }
        }
        if let Some(Stop::DivZero(loc)) = &run.stop {
            let flagged = r.diagnostics.iter().any(|d| &d.loc == loc);
            if !flagged {
                return Some(format!("{name}: {}: division by zero at {loc} not reported", r.config.domain));
            }
        }
    }
    None
}
