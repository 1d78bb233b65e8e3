use std::collections::{BTreeMap, HashMap};

use crate::cfg::{order_blocks, mark_back_edges, BasicBlock, BlockId, Cfg, CfgError, Edge, LoopInfo, TerminatorKind};
use crate::frontend::ast::{Stmt, StmtKind};
use crate::normalizer::NormalizedFunction;

/// Builds, orders and back-edge-marks the CFG of a normalized function.
///
/// Blocks are numbered in creation order: the entry is 0, the function body
/// starts at 1 and the exit block is created last.
pub fn build_cfg(f: &NormalizedFunction) -> Result<Cfg, CfgError> {
    let mut b = Builder::default();
    let entry = b.new_block(TerminatorKind::Empty);
    let mut cur = None;
    if !f.body.is_empty() {
        let first = b.new_block(TerminatorKind::None);
        b.edge(entry, first);
        cur = b.stmts(&f.body, Some(first))?;
    }
    let exit = b.new_block(TerminatorKind::Empty);
    match cur {
        Some(c) => b.edge(c, exit),
        None if f.body.is_empty() => b.edge(entry, exit),
        None => {}
    }
    for r in std::mem::take(&mut b.returns) {
        b.edge(r, exit);
    }
    for (src, label) in std::mem::take(&mut b.gotos) {
        let dst = *b
            .labels
            .get(&label)
            .ok_or_else(|| CfgError::MalformedCfg(format!("goto to undefined label {label}")))?;
        b.edge(src, dst);
    }
    for (src, dst) in &b.edge_order {
        b.blocks[*dst].predecessors.push(*src);
    }
    for blk in &mut b.blocks {
        blk.predecessors.sort_unstable();
    }
    let mut cfg = Cfg {
        function: f.name.clone(),
        blocks: b.blocks,
        entry,
        exit,
        block_list: Vec::new(),
        edges: b.edges,
        loops: b.loops,
    };
    cfg.block_list = order_blocks(&cfg);
    mark_back_edges(&mut cfg)?;
    Ok(cfg)
}

#[derive(Default)]
struct Builder {
    blocks: Vec<BasicBlock>,
    edges: BTreeMap<(BlockId, BlockId), Edge>,
    edge_order: Vec<(BlockId, BlockId)>,
    labels: HashMap<String, BlockId>,
    gotos: Vec<(BlockId, String)>,
    returns: Vec<BlockId>,
    loops: Vec<LoopInfo>,
}

impl Builder {
    fn new_block(&mut self, terminator: TerminatorKind) -> BlockId {
        let id = self.blocks.len();
        self.blocks.push(BasicBlock {
            id,
            statements: Vec::new(),
            terminator,
            condition: None,
            successors: Vec::new(),
            predecessors: Vec::new(),
            is_back_edge_source: false,
        });
        id
    }

    fn edge(&mut self, src: BlockId, dst: BlockId) {
        if self.edges.contains_key(&(src, dst)) {
            return;
        }
        self.blocks[src].successors.push(dst);
        self.edge_order.push((src, dst));
        self.edges.insert(
            (src, dst),
            Edge {
                src,
                dst,
                is_back_edge: false,
                visited: false,
            },
        );
    }

    /// The block to append to, opening an (unreachable) one if needed.
    fn current(&mut self, cur: Option<BlockId>) -> BlockId {
        cur.unwrap_or_else(|| self.new_block(TerminatorKind::None))
    }

    fn is_fresh(&self, b: BlockId) -> bool {
        let blk = &self.blocks[b];
        blk.statements.is_empty() && blk.terminator == TerminatorKind::None && blk.successors.is_empty()
    }

    fn stmts(&mut self, body: &[Stmt], mut cur: Option<BlockId>) -> Result<Option<BlockId>, CfgError> {
        for s in body {
            cur = self.stmt(s, cur)?;
        }
        Ok(cur)
    }

    fn stmt(&mut self, s: &Stmt, cur: Option<BlockId>) -> Result<Option<BlockId>, CfgError> {
        match &s.kind {
            StmtKind::Decl { .. } | StmtKind::Expr(_) | StmtKind::Assert(_) => {
                let b = self.current(cur);
                self.blocks[b].statements.push(s.clone());
                Ok(Some(b))
            }
            StmtKind::Return(_) => {
                let b = self.current(cur);
                self.blocks[b].statements.push(s.clone());
                self.returns.push(b);
                Ok(None)
            }
            StmtKind::Goto(l) => {
                let b = self.current(cur);
                self.gotos.push((b, l.clone()));
                Ok(None)
            }
            StmtKind::Label(l) => {
                let b = match cur {
                    Some(c) if self.is_fresh(c) => c,
                    Some(c) => {
                        let n = self.new_block(TerminatorKind::None);
                        self.edge(c, n);
                        n
                    }
                    None => self.new_block(TerminatorKind::None),
                };
                if self.labels.insert(l.clone(), b).is_some() {
                    return Err(CfgError::MalformedCfg(format!("duplicate label {l}")));
                }
                Ok(Some(b))
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.current(cur);
                self.blocks[c].terminator = TerminatorKind::If;
                self.blocks[c].condition = Some(cond.clone());
                let then_b = self.new_block(TerminatorKind::None);
                self.edge(c, then_b);
                let then_end = self.stmts(then_branch, Some(then_b))?;
                let else_end = match else_branch {
                    Some(eb) => {
                        let else_b = self.new_block(TerminatorKind::None);
                        self.edge(c, else_b);
                        Some(self.stmts(eb, Some(else_b))?)
                    }
                    None => None,
                };
                let join = self.new_block(TerminatorKind::None);
                if else_end.is_none() {
                    self.edge(c, join);
                }
                if let Some(t) = then_end {
                    self.edge(t, join);
                }
                if let Some(Some(e)) = else_end {
                    self.edge(e, join);
                }
                Ok(Some(join))
            }
            StmtKind::While { cond, body } => {
                let head = match cur {
                    Some(c) if self.is_fresh(c) => c,
                    Some(c) => {
                        let h = self.new_block(TerminatorKind::None);
                        self.edge(c, h);
                        h
                    }
                    None => self.new_block(TerminatorKind::None),
                };
                self.blocks[head].terminator = TerminatorKind::While;
                self.blocks[head].condition = Some(cond.clone());
                let body_b = self.new_block(TerminatorKind::None);
                self.edge(head, body_b);
                let body_end = self.stmts(body, Some(body_b))?;
                if let Some(e) = body_end {
                    self.edge(e, head);
                }
                let after = self.new_block(TerminatorKind::None);
                self.edge(head, after);
                self.loops.push(LoopInfo {
                    head,
                    body: (body_b..after).collect(),
                    latch: body_end,
                });
                Ok(Some(after))
            }
            StmtKind::Block(b) => self.stmts(b, cur),
            StmtKind::Empty => Ok(cur),
            other => Err(CfgError::MalformedCfg(format!(
                "statement not in normal form: {}",
                match other {
                    StmtKind::DoWhile { .. } => "do-while",
                    StmtKind::For { .. } => "for",
                    StmtKind::Switch { .. } | StmtKind::Case(_) | StmtKind::Default => "switch",
                    _ => "break",
                }
            ))),
        }
    }
}
