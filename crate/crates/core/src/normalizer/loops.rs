//! `for` and `do`-`while` to `while`, and `break` to `goto`.

use std::collections::HashMap;

use crate::frontend::ast::*;
use crate::frontend::types::CType;
use crate::normalizer::{replace_breaks, Fresh, NormalizeError};

/// Rewrites `for` and `do`-`while` loops as `while` loops. A `do` body is
/// duplicated once in front of the loop.
pub fn desugar_loops(mut f: Function) -> Function {
    let mut fresh = Fresh::for_function(&f);
    let body = std::mem::take(&mut f.body);
    f.body = loops_in(body, &mut fresh);
    f
}

fn loops_in(body: Vec<Stmt>, fresh: &mut Fresh) -> Vec<Stmt> {
    let mut out = Vec::new();
    for mut s in body {
        for b in s.bodies_mut() {
            *b = loops_in(std::mem::take(b), fresh);
        }
        let loc = s.loc.clone();
        match s.kind {
            StmtKind::For {
                init,
                cond,
                step,
                mut body,
            } => {
                out.extend(init);
                let cond = cond.unwrap_or_else(|| Expr::int(1, CType::INT, loc.clone()));
                if let Some(step) = step {
                    let sloc = step.loc.clone();
                    body.push(Stmt::new(StmtKind::Expr(step), sloc));
                }
                out.push(Stmt::new(StmtKind::While { cond, body }, loc));
            }
            StmtKind::DoWhile { body, cond } => {
                let mut first = body.clone();
                rename_labels(&mut first, fresh);
                let exit = fresh.label();
                let used = replace_breaks(&mut first, &exit);
                out.extend(first);
                out.push(Stmt::new(StmtKind::While { cond, body }, loc.clone()));
                if used {
                    out.push(Stmt::new(StmtKind::Label(exit), loc));
                }
            }
            kind => out.push(Stmt::new(kind, loc)),
        }
    }
    out
}

/// Gives every label defined in `body` a fresh name, updating gotos that
/// refer to them.
fn rename_labels(body: &mut [Stmt], fresh: &mut Fresh) {
    let mut map = HashMap::new();
    for s in body.iter() {
        s.walk(&mut |s| {
            if let StmtKind::Label(l) = &s.kind {
                map.insert(l.clone(), String::new());
            }
        });
    }
    let mut keys: Vec<_> = map.keys().cloned().collect();
    keys.sort();
    for k in keys {
        map.insert(k, fresh.label());
    }
    fn apply(body: &mut [Stmt], map: &HashMap<String, String>) {
        for s in body {
            if let StmtKind::Label(l) | StmtKind::Goto(l) = &mut s.kind {
                if let Some(n) = map.get(l) {
                    *l = n.clone();
                }
            }
            for b in s.bodies_mut() {
                apply(b, map);
            }
        }
    }
    apply(body, &map);
}

/// Replaces each `break` with a `goto` to a fresh label placed right after
/// the innermost enclosing loop. Breaks that bind to a `switch` are left in
/// place.
pub fn desugar_break(mut f: Function) -> Result<Function, NormalizeError> {
    let mut fresh = Fresh::for_function(&f);
    let body = std::mem::take(&mut f.body);
    f.body = breaks_in(body, &mut fresh, false)?;
    Ok(f)
}

fn breaks_in(body: Vec<Stmt>, fresh: &mut Fresh, breakable: bool) -> Result<Vec<Stmt>, NormalizeError> {
    let mut out = Vec::new();
    for mut s in body {
        let is_loop = s.is_loop();
        let is_switch = matches!(s.kind, StmtKind::Switch { .. });
        if let StmtKind::Break = s.kind {
            if !breakable {
                return Err(NormalizeError::BreakOutsideLoop(s.loc));
            }
        }
        for b in s.bodies_mut() {
            *b = breaks_in(std::mem::take(b), fresh, breakable || is_loop || is_switch)?;
        }
        if is_loop {
            let label = fresh.label();
            let mut used = false;
            for b in s.bodies_mut() {
                used |= replace_breaks(b, &label);
            }
            let loc = s.loc.clone();
            out.push(s);
            if used {
                out.push(Stmt::new(StmtKind::Label(label), loc));
            }
        } else {
            out.push(s);
        }
    }
    Ok(out)
}
