//! Events recorded while iterating, for `--trace` listings and tests.

use crate::cfg::BlockId;
use crate::domains::DomainElem;

#[derive(Clone, Debug, PartialEq)]
pub enum TraceEvent {
    /// State at the end of a block, and for branches the two condition
    /// abstractions.
    Terminator {
        block: BlockId,
        state: DomainElem,
        cond_pos: Option<DomainElem>,
        cond_neg: Option<DomainElem>,
    },
    /// Entry of a block with a single branching predecessor.
    Meet { block: BlockId, state: DomainElem },
    /// Entry of a block with several predecessors.
    Join { block: BlockId, state: DomainElem },
    /// One back-edge visit.
    Widen {
        block: BlockId,
        visit: u32,
        widened: bool,
        fixpoint: bool,
        old: DomainElem,
        current: DomainElem,
    },
    /// Iteration goes back to a loop head.
    Jump { from: BlockId, to: BlockId },
    NarrowSweep { sweep: u32, changed: bool },
    /// A recomputed state was not below the previous one during narrowing.
    NotDescending { block: BlockId, sweep: u32 },
}
