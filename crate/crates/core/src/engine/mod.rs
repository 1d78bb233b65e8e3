//! Fixpoint iteration over the CFG: block entry states from joins and
//! branch meets, statement transfer, delayed widening at back-edge sources,
//! optional narrowing sweeps and a final checking pass.

mod state;
mod trace;

use std::sync::Arc;

use thiserror::Error;

use crate::cfg::{build_cfg, BlockId, Cfg, CfgError, TerminatorKind};
use crate::checks::{self, Diagnostic, Verdict};
use crate::domains::eval::expand_compound;
use crate::domains::{DomainElem, DomainError, DomainKind, VarEnv};
use crate::frontend::ast::{ExprKind, Stmt, StmtKind};
use crate::frontend::{self, FrontendError};
use crate::normalizer::{normalize, NormalizeError, NormalizedFunction};

pub use state::State;
pub use trace::TraceEvent;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub domain: DomainKind,
    /// Back-edge visits before widening starts. At least 1.
    pub num_unrollings: u32,
    /// Descending sweeps after the ascending phase; 0 disables narrowing.
    pub narrowing_iterations: u32,
    /// Back-edge visits allowed without reaching a fixpoint.
    pub max_fixpoint_sweeps: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            domain: DomainKind::Interval,
            num_unrollings: 5,
            narrowing_iterations: 2,
            max_fixpoint_sweeps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("no fixpoint at block {0} within the sweep budget")]
    FixpointBudgetExceeded(BlockId),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("{function}: {error}")]
    Engine { function: String, error: EngineError },
}

/// What is known about one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSummary {
    pub block_id: BlockId,
    pub terminator: TerminatorKind,
    pub is_back_edge_source: bool,
    /// State at block entry, from the final pass.
    pub entry_state: State,
    pub end_state: State,
    /// Condition abstractions `assume(⊤, cond)` for both outcomes.
    pub cond_pos: Option<DomainElem>,
    pub cond_neg: Option<DomainElem>,
    /// Previous value at the loop exit, kept on back-edge sources.
    pub loop_exit_prev: Option<State>,
    pub back_edge_visits: u32,
    /// Times the block was processed in the ascending phase.
    pub visits: u32,
}

/// One summary per CFG block, indexed by block id.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub blocks: Vec<BlockSummary>,
}

impl SummaryTable {
    pub fn get(&self, id: BlockId) -> &BlockSummary {
        &self.blocks[id]
    }
}

/// Everything produced for one function.
#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub function: String,
    pub config: EngineConfig,
    pub env: Arc<VarEnv>,
    pub cfg: Cfg,
    pub table: SummaryTable,
    pub diagnostics: Vec<Diagnostic>,
    pub verdicts: Vec<Verdict>,
    pub trace: Vec<TraceEvent>,
    /// Non-fatal anomalies of the iteration itself.
    pub warnings: Vec<String>,
}

impl AnalysisResult {
    /// Entry state of the exit block.
    pub fn exit_state(&self) -> &DomainElem {
        &self.table.get(self.cfg.exit).entry_state.elem
    }

    pub fn entry_state(&self, block: BlockId) -> &DomainElem {
        &self.table.get(block).entry_state.elem
    }

    /// Block with the given number in the descending numbering used by dumps.
    pub fn block_by_display_id(&self, display_id: usize) -> BlockId {
        self.cfg.blocks.len() - 1 - display_id
    }
}

/// Builds the CFG of `f` and runs the whole analysis on it.
pub fn analyze_function(f: &NormalizedFunction, config: &EngineConfig) -> Result<AnalysisResult, EngineError> {
    if config.num_unrollings == 0 {
        return Err(EngineError::Config("num_unrollings must be at least 1".into()));
    }
    if config.max_fixpoint_sweeps == 0 {
        return Err(EngineError::Config("max_fixpoint_sweeps must be positive".into()));
    }
    let cfg = build_cfg(f)?;
    let env = VarEnv::new(f.variables.clone());
    let mut e = Engine::new(cfg, env, config);
    e.process_cfg()?;
    e.narrow_pass()?;
    e.final_pass()?;
    Ok(e.finish(f.name.clone()))
}

/// Compiles, normalizes and analyzes every function of `source`.
pub fn analyze_source(source: &str, file: &str, config: &EngineConfig) -> Result<Vec<AnalysisResult>, AnalyzeError> {
    let program = frontend::compile(source, file)?;
    let mut out = Vec::new();
    for f in program.functions {
        let nf = normalize(f)?;
        let r = analyze_function(&nf, config).map_err(|error| AnalyzeError::Engine {
            function: nf.name.clone(),
            error,
        })?;
        out.push(r);
    }
    Ok(out)
}

struct Engine<'a> {
    cfg: Cfg,
    env: Arc<VarEnv>,
    config: &'a EngineConfig,
    table: SummaryTable,
    trace: Vec<TraceEvent>,
    diagnostics: Vec<Diagnostic>,
    verdicts: Vec<Verdict>,
    warnings: Vec<String>,
}

fn is_branch(t: TerminatorKind) -> bool {
    matches!(t, TerminatorKind::If | TerminatorKind::While)
}

impl<'a> Engine<'a> {
    fn new(cfg: Cfg, env: Arc<VarEnv>, config: &'a EngineConfig) -> Self {
        let kind = config.domain;
        let blocks = cfg
            .blocks
            .iter()
            .map(|b| BlockSummary {
                block_id: b.id,
                terminator: b.terminator,
                is_back_edge_source: b.is_back_edge_source,
                entry_state: State::bottom(kind, &env),
                end_state: State::bottom(kind, &env),
                cond_pos: None,
                cond_neg: None,
                loop_exit_prev: None,
                back_edge_visits: 0,
                visits: 0,
            })
            .collect();
        Engine {
            cfg,
            env,
            config,
            table: SummaryTable { blocks },
            trace: Vec::new(),
            diagnostics: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn finish(self, function: String) -> AnalysisResult {
        AnalysisResult {
            function,
            config: self.config.clone(),
            env: self.env,
            cfg: self.cfg,
            table: self.table,
            diagnostics: self.diagnostics,
            verdicts: self.verdicts,
            trace: self.trace,
            warnings: self.warnings,
        }
    }

    fn kind(&self) -> DomainKind {
        self.config.domain
    }

    fn bottom(&self) -> State {
        State::bottom(self.kind(), &self.env)
    }

    /// Whether `b` branches to two distinct blocks.
    fn splits(&self, b: BlockId) -> bool {
        let blk = self.cfg.block(b);
        is_branch(blk.terminator) && blk.successors.len() == 2 && blk.successors[0] != blk.successors[1]
    }

    /// State flowing along `pred -> b`.
    fn edge_value(&self, pred: BlockId, b: BlockId) -> Result<State, DomainError> {
        if self.splits(pred) {
            self.meet_before(b, pred)
        } else {
            Ok(self.table.get(pred).end_state.clone())
        }
    }

    /// Predecessor's end state met with the condition abstraction of the
    /// outcome leading to `b`, then refined by the condition itself.
    fn meet_before(&self, b: BlockId, pred: BlockId) -> Result<State, DomainError> {
        let p = self.cfg.block(pred);
        let sum = self.table.get(pred);
        let positive = p.successors[0] == b;
        let cond = p.condition.as_ref().expect("branch has a condition");
        let abstraction = if positive { &sum.cond_pos } else { &sum.cond_neg };
        let met = match abstraction {
            Some(c) => sum.end_state.meet_elem(c)?,
            None => sum.end_state.clone(),
        };
        Ok(met.assume(cond, positive))
    }

    /// Join over the predecessors. Unvisited back edges are skipped unless
    /// `all_edges`; every edge is marked visited.
    fn join_before(&mut self, b: BlockId, all_edges: bool) -> Result<State, DomainError> {
        let mut acc: Option<State> = None;
        for p in self.cfg.block(b).predecessors.clone() {
            let edge = self.cfg.edge(p, b);
            if all_edges || !edge.is_back_edge || edge.visited {
                let v = self.edge_value(p, b)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.join(&v)?,
                });
            }
            self.cfg.edge_mut(p, b).visited = true;
        }
        Ok(acc.unwrap_or_else(|| self.bottom()))
    }

    fn compute_entry(&mut self, b: BlockId, all_edges: bool) -> Result<State, DomainError> {
        if b == self.cfg.entry {
            return Ok(State::entry(self.kind(), &self.env));
        }
        let preds = self.cfg.block(b).predecessors.clone();
        match preds[..] {
            [] => Ok(self.bottom()),
            [p] if self.splits(p) => {
                let s = self.meet_before(b, p)?;
                self.trace.push(TraceEvent::Meet {
                    block: b,
                    state: s.elem.clone(),
                });
                Ok(s)
            }
            [p] => Ok(self.table.get(p).end_state.clone()),
            _ => {
                let s = self.join_before(b, all_edges)?;
                self.trace.push(TraceEvent::Join {
                    block: b,
                    state: s.elem.clone(),
                });
                Ok(s)
            }
        }
    }

    fn transfer(&self, s: State, stmt: &Stmt) -> State {
        match &stmt.kind {
            StmtKind::Decl { name, init: Some(e), .. } => s.assign(name, e),
            StmtKind::Decl { name, init: None, .. } => s.declare_uninit(name),
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Assign(name, v) => s.assign(name, v),
                ExprKind::CompoundAssign(op, name, v) => {
                    let ty = self.env.index(name).map(|i| self.env.ty(i)).unwrap_or_else(|| v.ty());
                    s.assign(name, &expand_compound(*op, name, ty, v, &e.loc))
                }
                _ => s,
            },
            _ => s,
        }
    }

    /// Runs the statements and the terminator of `b` from `entry`.
    fn process_stmt(&self, b: BlockId, entry: State) -> (State, Option<DomainElem>, Option<DomainElem>) {
        let blk = self.cfg.block(b);
        let mut s = entry;
        for stmt in &blk.statements {
            s = self.transfer(s, stmt);
        }
        let (pos, neg) = match &blk.condition {
            Some(c) => {
                let top = DomainElem::top(self.kind(), &self.env);
                (Some(top.assume(c, true)), Some(top.assume(c, false)))
            }
            None => (None, None),
        };
        (s, pos, neg)
    }

    /// Delayed widening at a back-edge source. Returns the value to store
    /// and whether the loop reached its fixpoint.
    fn widen_abs_val(&mut self, b: BlockId, current: State) -> Result<(State, bool), EngineError> {
        let unroll = self.config.num_unrollings;
        let budget = self.config.max_fixpoint_sweeps;
        let sum = &mut self.table.blocks[b];
        sum.back_edge_visits += 1;
        let visit = sum.back_edge_visits;
        if visit > budget {
            return Err(EngineError::FixpointBudgetExceeded(b));
        }
        let (old, new, widened, fixpoint) = match sum.loop_exit_prev.clone().filter(|_| visit > 1) {
            None => {
                sum.loop_exit_prev = Some(current.clone());
                (current.clone(), current, false, false)
            }
            Some(prev) => {
                let widened = visit >= unroll + 2;
                let new = if widened { prev.widen(&current)? } else { current };
                let fixpoint = new.equivalent(&prev)?;
                if fixpoint {
                    sum.back_edge_visits = 0;
                } else {
                    sum.loop_exit_prev = Some(new.clone());
                }
                (prev, new, widened, fixpoint)
            }
        };
        self.trace.push(TraceEvent::Widen {
            block: b,
            visit,
            widened,
            fixpoint,
            old: old.elem,
            current: new.elem.clone(),
        });
        Ok((new, fixpoint))
    }

    fn store(&mut self, b: BlockId, end: State, pos: Option<DomainElem>, neg: Option<DomainElem>) {
        let sum = &mut self.table.blocks[b];
        sum.end_state = end;
        sum.cond_pos = pos;
        sum.cond_neg = neg;
    }

    /// The ascending phase: walks `block_list`, returning to a loop head
    /// from its back-edge source until that source reaches a fixpoint.
    fn process_cfg(&mut self) -> Result<(), EngineError> {
        let list = self.cfg.block_list.clone();
        let mut pos = 0;
        let mut jumped_to: Option<BlockId> = None;
        while pos < list.len() {
            let b = list[pos];
            if jumped_to != Some(b) {
                // Entering a loop afresh: its previous back-edge values are stale.
                let stale: Vec<_> = self.cfg.back_edges().filter(|e| e.dst == b).map(|e| (e.src, e.dst)).collect();
                for (s, d) in stale {
                    self.cfg.edge_mut(s, d).visited = false;
                }
            }
            jumped_to = None;
            let entry = self.compute_entry(b, false)?;
            let (mut end, cp, cn) = self.process_stmt(b, entry);
            self.table.blocks[b].visits += 1;
            self.trace.push(TraceEvent::Terminator {
                block: b,
                state: end.elem.clone(),
                cond_pos: cp.clone(),
                cond_neg: cn.clone(),
            });
            let mut back_to = None;
            if self.cfg.block(b).is_back_edge_source {
                let (new, fixpoint) = self.widen_abs_val(b, end)?;
                end = new;
                if !fixpoint {
                    back_to = self
                        .cfg
                        .back_edges()
                        .filter(|e| e.src == b)
                        .filter_map(|e| self.cfg.position(e.dst))
                        .min();
                }
            }
            self.store(b, end, cp, cn);
            match back_to {
                Some(p) => {
                    self.trace.push(TraceEvent::Jump { from: b, to: list[p] });
                    jumped_to = Some(list[p]);
                    pos = p;
                }
                None => pos += 1,
            }
        }
        Ok(())
    }

    /// Descending sweeps: all edges contribute, back-edge sources combine
    /// with narrowing, other blocks with meet.
    fn narrow_pass(&mut self) -> Result<(), EngineError> {
        let list = self.cfg.block_list.clone();
        for sweep in 1..=self.config.narrowing_iterations {
            let mut changed = false;
            for &b in &list {
                let mark = self.trace.len();
                let entry = self.compute_entry(b, true)?;
                self.trace.truncate(mark);
                let (new, cp, cn) = self.process_stmt(b, entry);
                let old = self.table.get(b).end_state.clone();
                let mut below = new.elem.clone();
                if !new.elem.leq(&old.elem)? {
                    self.trace.push(TraceEvent::NotDescending { block: b, sweep });
                    self.warnings.push(format!(
                        "narrowing sweep {sweep}: state of block B{} did not descend",
                        self.cfg.display_id(b)
                    ));
                    below = old.elem.meet(&new.elem)?;
                }
                let elem = if self.cfg.block(b).is_back_edge_source {
                    old.elem.narrow(&below)?
                } else {
                    old.elem.meet(&below)?
                };
                let next = new.replace_elem(elem);
                if !next.equivalent(&old)? {
                    changed = true;
                }
                self.store(b, next, cp, cn);
            }
            self.trace.push(TraceEvent::NarrowSweep { sweep, changed });
            if !changed {
                break;
            }
        }
        Ok(())
    }

    /// Recomputes every entry state from the final end states and runs the
    /// checks on it.
    fn final_pass(&mut self) -> Result<(), EngineError> {
        for b in self.cfg.block_list.clone() {
            let mark = self.trace.len();
            let entry = self.compute_entry(b, true)?;
            self.trace.truncate(mark);
            self.table.blocks[b].entry_state = entry.clone();
            self.check_block(b, entry);
        }
        Ok(())
    }

    fn check_block(&mut self, b: BlockId, entry: State) {
        let blk = self.cfg.block(b).clone();
        let mut s = entry;
        for stmt in &blk.statements {
            let init = |v: &str| s.init(v);
            match &stmt.kind {
                StmtKind::Decl { init: Some(e), .. } | StmtKind::Return(Some(e)) => {
                    checks::check_expr(&s.elem, &init, e, &mut self.diagnostics)
                }
                StmtKind::Expr(e) => match &e.kind {
                    ExprKind::Assign(_, v) => checks::check_expr(&s.elem, &init, v, &mut self.diagnostics),
                    ExprKind::CompoundAssign(op, name, v) => {
                        let ty = self.env.index(name).map(|i| self.env.ty(i)).unwrap_or_else(|| v.ty());
                        let full = expand_compound(*op, name, ty, v, &e.loc);
                        checks::check_expr(&s.elem, &init, &full, &mut self.diagnostics)
                    }
                    _ => {}
                },
                StmtKind::Assert(c) => {
                    checks::check_expr(&s.elem, &init, c, &mut self.diagnostics);
                    self.verdicts.push(checks::check_assert(&s.elem, c, &stmt.loc));
                }
                _ => {}
            }
            s = self.transfer(s, stmt);
        }
        if let Some(c) = &blk.condition {
            let init = |v: &str| s.init(v);
            checks::check_expr(&s.elem, &init, c, &mut self.diagnostics);
        }
    }
}
