//! Text and JSON reports.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::cfg::{BlockId, TerminatorKind};
use crate::checks::{Diagnostic, Verdict};
use crate::domains::{Bound, DomainElem};
use crate::engine::{AnalysisResult, EngineConfig, TraceEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// `interval of dim (n,0):` followed by one indented line per constraint.
pub fn listing(elem: &DomainElem) -> String {
    let head = format!("{} of dim ({},0):", elem.kind(), elem.env().len());
    if elem.is_bottom() {
        return format!("{head} bottom");
    }
    let mut s = head;
    for line in elem.render().lines() {
        s.push_str("\n       ");
        s.push_str(line);
    }
    s
}

fn block_name(r: &AnalysisResult, b: BlockId) -> String {
    format!("B{}", r.cfg.display_id(b))
}

fn trace_text(r: &AnalysisResult, out: &mut String) {
    for ev in &r.trace {
        match ev {
            TraceEvent::Terminator {
                block,
                state,
                cond_pos,
                cond_neg,
            } => {
                let _ = writeln!(out, "  @end of block {}  abstract value after block terminator is processed", r.cfg.display_id(*block));
                let _ = writeln!(out, "{}", listing(state));
                for c in [cond_pos, cond_neg].into_iter().flatten() {
                    let _ = writeln!(out, "{}", listing(c));
                }
            }
            TraceEvent::Meet { block, state } => {
                let _ = writeln!(out, "  @begin of block {}  abstract value after meet", r.cfg.display_id(*block));
                let _ = writeln!(out, "{}", listing(state));
            }
            TraceEvent::Join { block, state } => {
                let _ = writeln!(out, "  @begin of block {}  abstract value after join", r.cfg.display_id(*block));
                let _ = writeln!(out, "{}", listing(state));
            }
            TraceEvent::Widen {
                block,
                visit,
                widened,
                fixpoint,
                old,
                current,
            } => {
                let _ = writeln!(
                    out,
                    "  back edge from block {}, visit {visit}{}",
                    r.cfg.display_id(*block),
                    if *widened { ", widening" } else { "" }
                );
                if *fixpoint {
                    let _ = writeln!(out, "Fixed Point:");
                }
                let _ = writeln!(out, "loopExitAbsValOld:\n{}", listing(old));
                let _ = writeln!(out, "loopExitAbsValCurrent:\n{}", listing(current));
            }
            TraceEvent::Jump { from, to } => {
                let _ = writeln!(out, "  back to block {} from block {}", r.cfg.display_id(*to), r.cfg.display_id(*from));
            }
            TraceEvent::NarrowSweep { sweep, changed } => {
                let _ = writeln!(out, "  narrowing sweep {sweep}{}", if *changed { "" } else { " (stable)" });
            }
            TraceEvent::NotDescending { block, sweep } => {
                let _ = writeln!(out, "  narrowing sweep {sweep}: block {} did not descend", r.cfg.display_id(*block));
            }
        }
        out.push('\n');
    }
}

fn config_line(c: &EngineConfig) -> String {
    format!(
        "domain {}, unroll {}, narrow {}",
        c.domain, c.num_unrollings, c.narrowing_iterations
    )
}

/// Human-readable report in the listing style of the analyzer's traces.
pub fn render_text(results: &[AnalysisResult], trace: bool) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(out, "function {} ({})", r.function, config_line(&r.config));
        out.push('\n');
        if trace {
            trace_text(r, &mut out);
        }
        let _ = writeln!(out, "Resulting values:");
        for &b in &r.cfg.block_list {
            let sum = r.table.get(b);
            let mut tags = Vec::new();
            if b == r.cfg.entry {
                tags.push("entry");
            }
            if b == r.cfg.exit {
                tags.push("exit");
            }
            if sum.is_back_edge_source {
                tags.push("back-edge source");
            }
            let tags = if tags.is_empty() { String::new() } else { format!(" ({})", tags.join(", ")) };
            let _ = writeln!(out, "  @begin of block {}{tags}", r.cfg.display_id(b));
            let _ = writeln!(out, "{}", listing(&sum.entry_state.elem));
        }
        let unreachable: Vec<String> = (0..r.cfg.blocks.len())
            .filter(|b| !r.cfg.is_reachable(*b))
            .map(|b| block_name(r, b))
            .collect();
        if !unreachable.is_empty() {
            let _ = writeln!(out, "  unreachable: {}", unreachable.join(", "));
        }
        let _ = writeln!(out, "abstract value:\n{}", listing(r.exit_state()));
        out.push('\n');
        if !r.diagnostics.is_empty() {
            let _ = writeln!(out, "Diagnostics:");
            for d in &r.diagnostics {
                let _ = writeln!(out, "  {d}");
            }
        }
        if !r.verdicts.is_empty() {
            let _ = writeln!(out, "Assertions:");
            for v in &r.verdicts {
                let _ = writeln!(out, "  {v}");
            }
        }
        for w in &r.warnings {
            let _ = writeln!(out, "note: {w}");
        }
    }
    out
}

#[derive(Serialize)]
struct VarJson<'a> {
    name: &'a str,
    lo: Bound,
    hi: Bound,
}

fn state_json(elem: &DomainElem) -> Value {
    let vars: Vec<VarJson> = elem
        .projections()
        .unwrap_or_default()
        .iter()
        .map(|(n, i)| VarJson {
            name: elem.env().name(elem.env().index(n).expect("own variable")),
            lo: i.lo.clone(),
            hi: i.hi.clone(),
        })
        .collect();
    json!({
        "bottom": elem.is_bottom(),
        "vars": vars,
        "text": elem.render(),
    })
}

fn terminator_name(t: TerminatorKind) -> &'static str {
    match t {
        TerminatorKind::Empty => "empty",
        TerminatorKind::None => "none",
        TerminatorKind::If => "if",
        TerminatorKind::While => "while",
    }
}

/// Machine-readable report with the top-level keys `config`, `blocks`,
/// `diagnostics` and `verdicts`.
pub fn render_json(results: &[AnalysisResult]) -> Value {
    let config = results.first().map(|r| &r.config).cloned().unwrap_or_default();
    let mut blocks = Vec::new();
    let mut diagnostics: Vec<(&str, &Diagnostic)> = Vec::new();
    let mut verdicts: Vec<(&str, &Verdict)> = Vec::new();
    for r in results {
        for (pos, &b) in r.cfg.block_list.iter().enumerate() {
            let sum = r.table.get(b);
            blocks.push(json!({
                "function": r.function,
                "block": r.cfg.display_id(b),
                "order": pos,
                "terminator": terminator_name(sum.terminator),
                "back_edge_source": sum.is_back_edge_source,
                "entry": state_json(&sum.entry_state.elem),
                "end": state_json(&sum.end_state.elem),
            }));
        }
        diagnostics.extend(r.diagnostics.iter().map(|d| (r.function.as_str(), d)));
        verdicts.extend(r.verdicts.iter().map(|v| (r.function.as_str(), v)));
    }
    let with_fn = |f: &str, v: Value| {
        let mut m = serde_json::Map::new();
        m.insert("function".into(), json!(f));
        if let Value::Object(o) = v {
            m.extend(o);
        }
        Value::Object(m)
    };
    json!({
        "config": {
            "domain": config.domain,
            "unroll": config.num_unrollings,
            "narrow": config.narrowing_iterations,
            "max_fixpoint_sweeps": config.max_fixpoint_sweeps,
        },
        "blocks": blocks,
        "diagnostics": diagnostics.into_iter().map(|(f, d)| with_fn(f, json!(d))).collect::<Vec<_>>(),
        "verdicts": verdicts.into_iter().map(|(f, v)| with_fn(f, json!(v))).collect::<Vec<_>>(),
    })
}

pub fn emit_report(results: &[AnalysisResult], format: Format, trace: bool) -> String {
    match format {
        Format::Text => render_text(results, trace),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&render_json(results)).expect("serializable");
            s.push('\n');
            s
        }
    }
}
