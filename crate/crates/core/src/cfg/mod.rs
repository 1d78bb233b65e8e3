//! Control-flow graphs over normalized functions.

mod build;
mod dump;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ast::{Expr, Stmt};

pub use build::build_cfg;
pub use dump::{dump_cfg, dump_cfg_dot};

pub type BlockId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfgError {
    #[error("malformed CFG: {0}")]
    MalformedCfg(String),
    #[error("irreducible CFG: {0}")]
    IrreducibleCfg(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TerminatorKind {
    /// Entry and exit blocks.
    Empty,
    /// Fall-through or jump.
    None,
    If,
    While,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasicBlock {
    pub id: BlockId,
    /// Declarations, assignments, assertions and returns.
    pub statements: Vec<Stmt>,
    pub terminator: TerminatorKind,
    /// Branch condition, present iff the terminator is `If` or `While`.
    pub condition: Option<Expr>,
    /// The first successor of a branch is its true side.
    pub successors: Vec<BlockId>,
    pub predecessors: Vec<BlockId>,
    pub is_back_edge_source: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: BlockId,
    pub dst: BlockId,
    pub is_back_edge: bool,
    pub visited: bool,
}

/// A `while` loop as laid out by the builder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopInfo {
    pub head: BlockId,
    /// Blocks created for the loop body (excluding the head).
    pub body: BTreeSet<BlockId>,
    /// Source of the edge back to the head, if the body can fall through.
    pub latch: Option<BlockId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cfg {
    pub function: String,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub exit: BlockId,
    /// Visit order of the reachable blocks.
    pub block_list: Vec<BlockId>,
    pub edges: BTreeMap<(BlockId, BlockId), Edge>,
    pub loops: Vec<LoopInfo>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id]
    }

    pub fn edge(&self, src: BlockId, dst: BlockId) -> &Edge {
        &self.edges[&(src, dst)]
    }

    pub fn edge_mut(&mut self, src: BlockId, dst: BlockId) -> &mut Edge {
        self.edges.get_mut(&(src, dst)).expect("edge exists")
    }

    /// Block number in the descending scheme where the entry has the highest
    /// number and the exit is 0.
    pub fn display_id(&self, id: BlockId) -> usize {
        self.blocks.len() - 1 - id
    }

    pub fn position(&self, id: BlockId) -> Option<usize> {
        self.block_list.iter().position(|b| *b == id)
    }

    pub fn is_reachable(&self, id: BlockId) -> bool {
        self.block_list.contains(&id)
    }

    pub fn loop_with_head(&self, head: BlockId) -> Option<&LoopInfo> {
        self.loops.iter().find(|l| l.head == head)
    }

    pub fn back_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(|e| e.is_back_edge)
    }

    pub fn reset_visited(&mut self) {
        for e in self.edges.values_mut() {
            e.visited = false;
        }
    }

    /// Whether `(src, dst)` is a loop latch edge in the builder's layout.
    fn is_latch_edge(&self, src: BlockId, dst: BlockId) -> bool {
        self.loops.iter().any(|l| l.head == dst && l.latch == Some(src))
    }
}

/// Orders the reachable blocks: a topological order of the graph without
/// loop latch edges, taking the smallest ready block id first. Loop heads
/// come before their bodies and bodies before the code after the loop.
pub fn order_blocks(cfg: &Cfg) -> Vec<BlockId> {
    let n = cfg.blocks.len();
    let mut reachable = vec![false; n];
    let mut stack = vec![cfg.entry];
    while let Some(b) = stack.pop() {
        if !std::mem::replace(&mut reachable[b], true) {
            stack.extend(cfg.blocks[b].successors.iter().copied());
        }
    }
    let forward = |s: BlockId, d: BlockId| !cfg.is_latch_edge(s, d);
    let mut indegree = vec![0usize; n];
    for e in cfg.edges.values() {
        if reachable[e.src] && forward(e.src, e.dst) {
            indegree[e.dst] += 1;
        }
    }
    let mut ready: BTreeSet<BlockId> = BTreeSet::new();
    ready.insert(cfg.entry);
    let mut order = Vec::new();
    while let Some(b) = ready.pop_first() {
        order.push(b);
        for &s in &cfg.blocks[b].successors {
            if forward(b, s) {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert(s);
                }
            }
        }
    }
    order
}

/// Flags every retreating edge (destination not after source in
/// `block_list`) as a back edge. Such an edge must target a loop head.
pub fn mark_back_edges(cfg: &mut Cfg) -> Result<(), CfgError> {
    let pos: BTreeMap<BlockId, usize> = cfg.block_list.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let mut marks = Vec::new();
    for e in cfg.edges.values() {
        let (Some(ps), Some(pd)) = (pos.get(&e.src), pos.get(&e.dst)) else { continue };
        if pd <= ps {
            if cfg.loop_with_head(e.dst).is_none() {
                return Err(CfgError::IrreducibleCfg(format!(
                    "edge B{} -> B{} retreats to a block that is not a loop head",
                    e.src, e.dst
                )));
            }
            marks.push((e.src, e.dst));
        }
    }
    if pos.len() != cfg.block_list.len() {
        return Err(CfgError::MalformedCfg("block_list repeats a block".into()));
    }
    for b in &mut cfg.blocks {
        b.is_back_edge_source = false;
    }
    for e in cfg.edges.values_mut() {
        e.is_back_edge = false;
    }
    for (s, d) in marks {
        cfg.edge_mut(s, d).is_back_edge = true;
        cfg.blocks[s].is_back_edge_source = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::normalizer::normalize;

    pub(crate) fn cfg_of(src: &str) -> Cfg {
        let f = compile(src, "t.c").unwrap().functions.remove(0);
        build_cfg(&normalize(f).unwrap()).unwrap()
    }

    const CONDITION: &str = "int main() { int x = 10; if (x > 0) x = 100; else x = -1; return 0; }";
    const LOOP: &str = "int main() { int a = 6, b = 2; while (a > 0) { a = a - 1; } b = a + b; return 0; }";

    #[test]
    fn straight_line() {
        let c = cfg_of("int main() { int x = 10; return x; }");
        assert_eq!(c.blocks.len(), 3);
        assert_eq!(c.block_list, vec![0, 1, 2]);
        assert_eq!(c.blocks[0].terminator, TerminatorKind::Empty);
        assert_eq!(c.blocks[1].terminator, TerminatorKind::None);
        assert_eq!(c.blocks[1].statements.len(), 2);
        assert_eq!(c.blocks[2].terminator, TerminatorKind::Empty);
        assert!(c.blocks[2].successors.is_empty());
    }

    #[test]
    fn condition_example_layout() {
        let c = cfg_of(CONDITION);
        assert_eq!(c.blocks.len(), 6);
        let cond = &c.blocks[1];
        assert_eq!(c.display_id(1), 4);
        assert_eq!(cond.terminator, TerminatorKind::If);
        assert_eq!(cond.successors, vec![2, 3]);
        assert_eq!((c.display_id(2), c.display_id(3), c.display_id(4)), (3, 2, 1));
        assert_eq!(c.blocks[4].predecessors, vec![2, 3]);
        assert_eq!(c.block_list, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(c.back_edges().count(), 0);
    }

    #[test]
    fn loop_example_layout() {
        let c = cfg_of(LOOP);
        assert_eq!(c.block_list, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(c.blocks[2].terminator, TerminatorKind::While);
        assert_eq!(c.blocks[2].successors, vec![3, 4]);
        let back: Vec<_> = c.back_edges().map(|e| (e.src, e.dst)).collect();
        assert_eq!(back, vec![(3, 2)]);
        assert!(c.blocks[3].is_back_edge_source);
    }

    #[test]
    fn empty_function() {
        let c = cfg_of("void f(void) { }");
        assert_eq!(c.block_list, vec![0, 1]);
        assert_eq!(c.blocks[0].successors, vec![1]);
    }

    #[test]
    fn nested_loops_have_two_back_edges() {
        let c = cfg_of("int main() { int i = 0, j; while (i < 3) { j = 0; while (j < 3) { j++; } i++; } return 0; }");
        let back: Vec<_> = c.back_edges().map(|e| (e.src, e.dst)).collect();
        assert_eq!(back.len(), 2);
        let heads: BTreeSet<_> = back.iter().map(|e| e.1).collect();
        assert_eq!(heads.len(), 2);
        for (s, d) in back {
            assert_eq!(c.blocks[d].terminator, TerminatorKind::While);
            assert!(c.position(d).unwrap() < c.position(s).unwrap());
        }
    }

    #[test]
    fn code_after_return_is_unreachable() {
        let c = cfg_of("int main() { int x = 1; return x; x = 2; }");
        let dead = c.blocks.iter().find(|b| !b.statements.is_empty() && !c.is_reachable(b.id)).unwrap();
        assert_eq!(dead.statements.len(), 1);
        assert!(dead.predecessors.is_empty());
    }

    #[test]
    fn irreducible_edges_are_rejected() {
        let mut c = cfg_of(CONDITION);
        c.edges.insert((4, 2), Edge { src: 4, dst: 2, is_back_edge: false, visited: false });
        assert!(matches!(mark_back_edges(&mut c), Err(CfgError::IrreducibleCfg(_))));
    }
}
