//! Source-to-source simplification into the small statement set the
//! analyzer understands: declarations, assignments, if/else, while,
//! goto/label, assertions and returns.

mod fold;
mod logical;
mod loops;

use std::collections::HashSet;

use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::types::SourceLoc;

pub use fold::{fold_constants, remove_unused};
pub use logical::desugar_logical;
pub use loops::{desugar_break, desugar_loops};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizeError {
    #[error("{0}: break outside of a loop")]
    BreakOutsideLoop(SourceLoc),
    #[error("{loc}: not in normal form: {detail}")]
    NotNormal { loc: SourceLoc, detail: String },
}

/// A function restricted to the normalized statement and expression forms.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedFunction(Function);

impl NormalizedFunction {
    /// Validates `f` against the normal form.
    pub fn new(f: Function) -> Result<Self, NormalizeError> {
        check_normal_form(&f)?;
        Ok(NormalizedFunction(f))
    }

    pub fn function(&self) -> &Function {
        &self.0
    }

    pub fn into_inner(self) -> Function {
        self.0
    }
}

impl std::ops::Deref for NormalizedFunction {
    type Target = Function;
    fn deref(&self) -> &Function {
        &self.0
    }
}

/// Runs the full pipeline.
pub fn normalize(f: Function) -> Result<NormalizedFunction, NormalizeError> {
    let f = desugar_loops(f);
    let f = desugar_logical(f);
    let f = desugar_break(f)?;
    let f = fold_constants(f);
    let f = remove_unused(f);
    NormalizedFunction::new(f)
}

/// Fresh temporaries `__t<k>` and labels `__L<k>`, numbered after any that
/// already occur in the function.
pub(crate) struct Fresh {
    next_temp: usize,
    next_label: usize,
    vars: HashSet<String>,
    labels: HashSet<String>,
}

impl Fresh {
    pub(crate) fn for_function(f: &Function) -> Fresh {
        let vars: HashSet<String> = f.variables.iter().map(|(n, _)| n.clone()).collect();
        let mut labels = HashSet::new();
        f.walk(&mut |s| {
            if let StmtKind::Label(l) | StmtKind::Goto(l) = &s.kind {
                labels.insert(l.clone());
            }
        });
        let max_suffix = |set: &HashSet<String>, prefix: &str| {
            set.iter()
                .filter_map(|n| n.strip_prefix(prefix)?.parse::<usize>().ok())
                .map(|k| k + 1)
                .max()
                .unwrap_or(0)
        };
        Fresh {
            next_temp: max_suffix(&vars, "__t"),
            next_label: max_suffix(&labels, "__L"),
            vars,
            labels,
        }
    }

    pub(crate) fn temp(&mut self) -> String {
        loop {
            let name = format!("__t{}", self.next_temp);
            self.next_temp += 1;
            if self.vars.insert(name.clone()) {
                return name;
            }
        }
    }

    pub(crate) fn label(&mut self) -> String {
        loop {
            let name = format!("__L{}", self.next_label);
            self.next_label += 1;
            if self.labels.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Replaces `break` statements that bind to the enclosing construct (not to
/// a nested loop or switch) with `goto label`. Returns whether any was found.
pub(crate) fn replace_breaks(body: &mut [Stmt], label: &str) -> bool {
    let mut found = false;
    for s in body {
        match &mut s.kind {
            StmtKind::Break => {
                s.kind = StmtKind::Goto(label.to_string());
                found = true;
            }
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. } | StmtKind::Switch { .. } => {}
            _ => {
                for b in s.bodies_mut() {
                    found |= replace_breaks(b, label);
                }
            }
        }
    }
    found
}

fn not_normal(loc: &SourceLoc, detail: impl Into<String>) -> NormalizeError {
    NormalizeError::NotNormal {
        loc: loc.clone(),
        detail: detail.into(),
    }
}

fn is_pure(e: &Expr) -> bool {
    !e.any(&|x| {
        matches!(
            x.kind,
            ExprKind::Assign(..)
                | ExprKind::CompoundAssign(..)
                | ExprKind::Logical(..)
                | ExprKind::Conditional(..)
                | ExprKind::Unary(
                    UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec,
                    _
                )
        )
    })
}

/// Structural scan for constructs that must not survive normalization.
pub fn check_normal_form(f: &Function) -> Result<(), NormalizeError> {
    let mut labels_seen: Vec<&str> = Vec::new();
    let mut pending_gotos: Vec<(&str, &SourceLoc)> = Vec::new();
    let mut err = None;
    f.walk(&mut |s| {
        if err.is_some() {
            return;
        }
        let check_pure = |e: &Expr, what: &str| {
            if is_pure(e) {
                Ok(())
            } else {
                Err(not_normal(&e.loc, format!("{what} is not a pure expression")))
            }
        };
        let r = match &s.kind {
            StmtKind::Decl { init, .. } => init.as_ref().map_or(Ok(()), |e| check_pure(e, "initializer")),
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Assign(_, v) | ExprKind::CompoundAssign(_, _, v) => check_pure(v, "assigned value"),
                _ => Err(not_normal(&s.loc, "expression statement is not an assignment")),
            },
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::Assert(cond) => {
                if !cond.is_relational() {
                    Err(not_normal(&cond.loc, "condition is not a relational comparison"))
                } else {
                    check_pure(cond, "condition")
                }
            }
            StmtKind::Return(Some(e)) => check_pure(e, "return value"),
            StmtKind::Goto(l) => {
                pending_gotos.push((l, &s.loc));
                Ok(())
            }
            StmtKind::Label(l) => {
                if labels_seen.contains(&l.as_str()) {
                    Err(not_normal(&s.loc, format!("duplicate label {l}")))
                } else {
                    labels_seen.push(l);
                    Ok(())
                }
            }
            StmtKind::DoWhile { .. } => Err(not_normal(&s.loc, "do-while loop")),
            StmtKind::For { .. } => Err(not_normal(&s.loc, "for loop")),
            StmtKind::Break => Err(not_normal(&s.loc, "break")),
            StmtKind::Switch { .. } | StmtKind::Case(_) | StmtKind::Default => Err(not_normal(&s.loc, "switch")),
            StmtKind::Return(None) | StmtKind::Block(_) | StmtKind::Empty => Ok(()),
        };
        if let Err(e) = r {
            err = Some(e);
        }
        // A goto is forward iff its label has not been seen yet when the goto
        // is reached in pre-order; resolve those that are now satisfied.
        if let StmtKind::Label(l) = &s.kind {
            pending_gotos.retain(|(g, _)| g != l);
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if let Some((l, loc)) = pending_gotos.first() {
        let detail = if labels_seen.contains(l) {
            format!("goto {l} is not forward")
        } else {
            format!("goto {l} has no label")
        };
        return Err(not_normal(loc, detail));
    }
    Ok(())
}
