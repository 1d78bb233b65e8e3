use std::fmt::Write;

use crate::cfg::{BlockId, Cfg, TerminatorKind};
use crate::frontend::pretty;

/// Block name in the descending scheme (entry highest, exit `B0`).
fn name(cfg: &Cfg, id: BlockId) -> String {
    format!("B{}", cfg.display_id(id))
}

fn names(cfg: &Cfg, ids: &[BlockId]) -> String {
    ids.iter().map(|b| name(cfg, *b)).collect::<Vec<_>>().join(", ")
}

fn terminator(cfg: &Cfg, id: BlockId) -> String {
    let b = cfg.block(id);
    let kind = match b.terminator {
        TerminatorKind::Empty => "Empty",
        TerminatorKind::None => "None",
        TerminatorKind::If => "If",
        TerminatorKind::While => "While",
    };
    match &b.condition {
        Some(c) => format!("{kind} ({})", pretty::expr(c, Default::default())),
        None => kind.to_string(),
    }
}

/// Text listing of every block in id order. Blocks are named by their
/// descending number; the construction id follows in parentheses.
pub fn dump_cfg(cfg: &Cfg) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "function {}", cfg.function);
    let _ = writeln!(out, "block_list: [{}]", names(cfg, &cfg.block_list));
    for b in &cfg.blocks {
        let mut tags = Vec::new();
        if b.id == cfg.entry {
            tags.push("entry");
        }
        if b.id == cfg.exit {
            tags.push("exit");
        }
        if !cfg.is_reachable(b.id) {
            tags.push("unreachable");
        }
        let tags = if tags.is_empty() { String::new() } else { format!(" [{}]", tags.join(", ")) };
        let _ = writeln!(out, "\n{} (id {}){}", name(cfg, b.id), b.id, tags);
        for s in &b.statements {
            let _ = writeln!(out, "  {}", pretty::stmt_inline(s));
        }
        let _ = writeln!(
            out,
            "  terminator: {}, succs: [{}], preds: [{}]",
            terminator(cfg, b.id),
            names(cfg, &b.successors),
            names(cfg, &b.predecessors)
        );
        for &s in &b.successors {
            if cfg.edge(b.id, s).is_back_edge {
                let _ = writeln!(out, "  back-edge → {}", name(cfg, s));
            }
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering.
pub fn dump_cfg_dot(cfg: &Cfg) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(&cfg.function));
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for b in &cfg.blocks {
        let mut label = format!("{} (id {})\\l", name(cfg, b.id), b.id);
        for s in &b.statements {
            label.push_str(&dot_escape(&pretty::stmt_inline(s)));
            label.push_str("\\l");
        }
        if let Some(c) = &b.condition {
            label.push_str(&dot_escape(&format!("[{}]", pretty::expr(c, Default::default()))));
            label.push_str("\\l");
        }
        let style = if cfg.is_reachable(b.id) { "" } else { ", style=dashed" };
        let _ = writeln!(out, "  n{} [label=\"{}\"{}];", b.id, label, style);
    }
    for e in cfg.edges.values() {
        let src = cfg.block(e.src);
        let mut attrs = Vec::new();
        if matches!(src.terminator, TerminatorKind::If | TerminatorKind::While) {
            let branch = if src.successors.first() == Some(&e.dst) { "T" } else { "F" };
            attrs.push(format!("label=\"{branch}\""));
        }
        if e.is_back_edge {
            attrs.push("style=bold".to_string());
            attrs.push("color=blue".to_string());
        }
        let attrs = if attrs.is_empty() { String::new() } else { format!(" [{}]", attrs.join(", ")) };
        let _ = writeln!(out, "  n{} -> n{}{};", e.src, e.dst, attrs);
    }
    out.push_str("}\n");
    out
}
