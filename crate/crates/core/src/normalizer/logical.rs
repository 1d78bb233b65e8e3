//! Lowering of short-circuit operators, `?:`, `switch`, embedded side
//! effects and non-relational conditions.

use crate::frontend::ast::*;
use crate::frontend::typecheck::{make_assign, make_binary, make_compound, make_nonzero};
use crate::frontend::types::{CType, SourceLoc};
use crate::normalizer::{replace_breaks, Fresh};

/// Rewrites `&&`, `||`, `!`, `?:` and `switch` into if-else ladders and
/// forward gotos, hoists side effects out of expressions (left to right),
/// and canonicalizes every branch condition to a relational comparison.
pub fn desugar_logical(mut f: Function) -> Function {
    let mut cx = Lower {
        fresh: Fresh::for_function(&f),
        new_vars: Vec::new(),
    };
    let body = std::mem::take(&mut f.body);
    f.body = cx.stmts(body);
    f.variables.extend(cx.new_vars);
    f
}

struct Lower {
    fresh: Fresh,
    new_vars: Vec<(String, CType)>,
}

fn stmt(kind: StmtKind, loc: &SourceLoc) -> Stmt {
    Stmt::new(kind, loc.clone())
}

fn goto(label: &str, loc: &SourceLoc) -> Stmt {
    stmt(StmtKind::Goto(label.to_string()), loc)
}

fn label(label: &str, loc: &SourceLoc) -> Stmt {
    stmt(StmtKind::Label(label.to_string()), loc)
}

fn is_literal(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::IntLit(_) | ExprKind::RealLit(..) => true,
        ExprKind::Cast { operand, .. } => is_literal(operand),
        _ => false,
    }
}

fn is_inc_dec(op: UnaryOp) -> bool {
    matches!(op, UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec)
}

fn step_op(op: UnaryOp) -> BinaryOp {
    match op {
        UnaryOp::PreInc | UnaryOp::PostInc => BinaryOp::Add,
        _ => BinaryOp::Sub,
    }
}

/// True for conditions that need no lowering beyond canonicalization.
fn is_simple(e: &Expr) -> bool {
    !e.any(&|x| {
        matches!(
            x.kind,
            ExprKind::Logical(..)
                | ExprKind::Conditional(..)
                | ExprKind::Assign(..)
                | ExprKind::CompoundAssign(..)
        ) || matches!(x.kind, ExprKind::Unary(op, _) if is_inc_dec(op))
    })
}

fn has_branching(e: &Expr) -> bool {
    e.any(&|x| matches!(x.kind, ExprKind::Logical(..) | ExprKind::Conditional(..)))
}

/// Logical negation, pushed through `&&`, `||`, `!` and comparisons.
fn negate(e: Expr) -> Expr {
    let loc = e.loc.clone();
    match e.kind {
        ExprKind::Logical(op, a, b) => {
            let op = match op {
                LogicalOp::And => LogicalOp::Or,
                LogicalOp::Or => LogicalOp::And,
            };
            Expr::typed(
                ExprKind::Logical(op, Box::new(negate(*a)), Box::new(negate(*b))),
                CType::INT,
                loc,
            )
        }
        ExprKind::Unary(UnaryOp::Not, a) => *a,
        ExprKind::Binary(op, a, b) if op.is_relational() => {
            Expr::typed(ExprKind::Binary(op.negate(), a, b), CType::INT, loc)
        }
        kind => {
            let e = Expr { kind, ..e };
            let zero = Expr::int(0, CType::INT, loc.clone());
            make_binary(BinaryOp::Eq, e, zero, loc).expect("comparison with zero is well typed")
        }
    }
}

/// Turns a pure value into a relational condition with the same truth value.
fn canonical(e: Expr) -> Expr {
    match e.kind {
        ExprKind::Binary(op, ..) if op.is_relational() => e,
        ExprKind::Unary(UnaryOp::Not, a) => canonical(negate(*a)),
        _ => make_nonzero(e),
    }
}

impl Lower {
    fn temp(&mut self, ty: CType, init: Option<Expr>, loc: &SourceLoc) -> (String, Stmt) {
        let name = self.fresh.temp();
        let ty = ty.unqualified();
        self.new_vars.push((name.clone(), ty));
        let decl = stmt(
            StmtKind::Decl {
                name: name.clone(),
                ty,
                init,
            },
            loc,
        );
        (name, decl)
    }

    fn stmts(&mut self, body: Vec<Stmt>) -> Vec<Stmt> {
        body.into_iter().flat_map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: Stmt) -> Vec<Stmt> {
        let loc = s.loc;
        match s.kind {
            StmtKind::Decl {
                name,
                ty,
                init: Some(e),
            } => {
                if matches!(e.peel_implicit().kind, ExprKind::Conditional(..) | ExprKind::Logical(..)) {
                    let mut out = vec![stmt(StmtKind::Decl { name: name.clone(), ty, init: None }, &loc)];
                    out.extend(self.assign_branching(&name, ty, e, &loc));
                    out
                } else {
                    let (mut pre, v) = self.value(e);
                    pre.push(stmt(StmtKind::Decl { name, ty, init: Some(v) }, &loc));
                    pre
                }
            }
            StmtKind::Expr(e) => self.effect(e),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = self.stmts(then_branch);
                let else_branch = else_branch.map(|b| self.stmts(b));
                self.branch(cond, then_branch, else_branch, &loc)
            }
            StmtKind::While { cond, body } => {
                let body = self.stmts(body);
                if is_simple(&cond) {
                    vec![stmt(StmtKind::While { cond: canonical(cond), body }, &loc)]
                } else {
                    let exit = self.fresh.label();
                    let mut new_body = self.branch(negate(cond), vec![goto(&exit, &loc)], None, &loc);
                    new_body.extend(body);
                    let one = Expr::int(1, CType::INT, loc.clone());
                    vec![
                        stmt(
                            StmtKind::While {
                                cond: canonical(one),
                                body: new_body,
                            },
                            &loc,
                        ),
                        label(&exit, &loc),
                    ]
                }
            }
            StmtKind::Switch { scrutinee, body } => self.switch(scrutinee, body, &loc),
            StmtKind::Assert(cond) => {
                if has_branching(&cond) {
                    let (t, decl) = self.temp(CType::INT, None, &loc);
                    let one = make_assign(&t, CType::INT, Expr::int(1, CType::INT, loc.clone()), loc.clone());
                    let zero = make_assign(&t, CType::INT, Expr::int(0, CType::INT, loc.clone()), loc.clone());
                    let mut out = vec![decl];
                    out.extend(self.branch(
                        cond,
                        vec![stmt(StmtKind::Expr(one), &loc)],
                        Some(vec![stmt(StmtKind::Expr(zero), &loc)]),
                        &loc,
                    ));
                    let tv = Expr::var(&t, CType::INT, loc.clone());
                    out.push(stmt(StmtKind::Assert(make_nonzero(tv)), &loc));
                    out
                } else {
                    let (mut pre, v) = self.value(cond);
                    pre.push(stmt(StmtKind::Assert(canonical(v)), &loc));
                    pre
                }
            }
            StmtKind::Return(Some(e)) => {
                let (mut pre, v) = self.value(e);
                pre.push(stmt(StmtKind::Return(Some(v)), &loc));
                pre
            }
            StmtKind::Block(body) => vec![stmt(StmtKind::Block(self.stmts(body)), &loc)],
            StmtKind::DoWhile { body, cond } => {
                // Only reached when loops have not been desugared yet.
                vec![stmt(StmtKind::DoWhile { body: self.stmts(body), cond }, &loc)]
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => vec![stmt(
                StmtKind::For {
                    init,
                    cond,
                    step,
                    body: self.stmts(body),
                },
                &loc,
            )],
            kind => vec![stmt(kind, &loc)],
        }
    }

    /// Lowers an expression evaluated for its side effects only.
    fn effect(&mut self, e: Expr) -> Vec<Stmt> {
        let loc = e.loc.clone();
        let ty = e.ty;
        match e.kind {
            ExprKind::Assign(x, v) => {
                let ty = ty.expect("typed");
                if matches!(v.peel_implicit().kind, ExprKind::Conditional(..) | ExprKind::Logical(..)) {
                    return self.assign_branching(&x, ty, *v, &loc);
                }
                let (mut pre, v) = self.value(*v);
                pre.push(stmt(StmtKind::Expr(Expr::typed(ExprKind::Assign(x, Box::new(v)), ty, loc.clone())), &loc));
                pre
            }
            ExprKind::CompoundAssign(op, x, v) => {
                let (mut pre, v) = self.value(*v);
                let e = Expr::typed(ExprKind::CompoundAssign(op, x, Box::new(v)), ty.expect("typed"), loc.clone());
                pre.push(stmt(StmtKind::Expr(e), &loc));
                pre
            }
            ExprKind::Unary(op, x) if is_inc_dec(op) => {
                vec![self.step_stmt(op, &x, &loc)]
            }
            kind => {
                let e = Expr { kind, ty, loc: loc.clone() };
                let (mut pre, v) = self.value(e);
                // Division and modulus may trap, so the computation is kept.
                let traps = v.any(&|x| matches!(x.kind, ExprKind::Binary(BinaryOp::Div | BinaryOp::Rem, ..)));
                if traps {
                    let (_, decl) = self.temp(v.ty(), Some(v), &loc);
                    pre.push(decl);
                }
                pre
            }
        }
    }

    /// `x += 1` or `x -= 1` for an increment or decrement of variable `x`.
    fn step_stmt(&mut self, op: UnaryOp, x: &Expr, loc: &SourceLoc) -> Stmt {
        let name = x.as_var().expect("increment operand is a variable");
        let one = Expr::int(1, CType::INT, loc.clone());
        stmt(StmtKind::Expr(make_compound(step_op(op), name, x.ty(), one, loc.clone())), loc)
    }

    /// `x = e` where `e` is a conditional or logical expression, as branches.
    fn assign_branching(&mut self, x: &str, ty: CType, e: Expr, loc: &SourceLoc) -> Vec<Stmt> {
        let e = peel_owned(e);
        match e.kind {
            ExprKind::Conditional(c, a, b) => {
                let then_branch = self.effect(make_assign(x, ty, *a, loc.clone()));
                let else_branch = self.effect(make_assign(x, ty, *b, loc.clone()));
                self.branch(*c, then_branch, Some(else_branch), loc)
            }
            _ => {
                let one = make_assign(x, ty, Expr::int(1, CType::INT, loc.clone()), loc.clone());
                let zero = make_assign(x, ty, Expr::int(0, CType::INT, loc.clone()), loc.clone());
                self.branch(
                    e,
                    vec![stmt(StmtKind::Expr(one), loc)],
                    Some(vec![stmt(StmtKind::Expr(zero), loc)]),
                    loc,
                )
            }
        }
    }

    /// Lowers `e` into statements to run first plus a pure expression with
    /// the same value and type.
    fn value(&mut self, e: Expr) -> (Vec<Stmt>, Expr) {
        let loc = e.loc.clone();
        let ty = e.ty;
        let rebuild = |kind| Expr { kind, ty, loc: loc.clone() };
        match e.kind {
            ExprKind::IntLit(_) | ExprKind::RealLit(..) | ExprKind::Var(_) => (vec![], e),
            ExprKind::Unary(op, x) if is_inc_dec(op) => {
                let name = x.as_var().expect("increment operand is a variable").to_string();
                let xty = x.ty();
                match op {
                    UnaryOp::PreInc | UnaryOp::PreDec => {
                        let s = self.step_stmt(op, &x, &loc);
                        (vec![s], Expr::var(&name, xty, loc))
                    }
                    _ => {
                        let (t, decl) = self.temp(xty, Some(*x.clone()), &loc);
                        let s = self.step_stmt(op, &x, &loc);
                        (vec![decl, s], Expr::var(&t, xty, loc))
                    }
                }
            }
            ExprKind::Unary(op, a) => {
                let (pre, a) = self.value(*a);
                (pre, rebuild(ExprKind::Unary(op, Box::new(a))))
            }
            ExprKind::Binary(op, l, r) => {
                let (pre, mut vals) = self.values_seq(vec![*l, *r], &loc);
                let r = vals.pop().unwrap();
                let l = vals.pop().unwrap();
                (pre, rebuild(ExprKind::Binary(op, Box::new(l), Box::new(r))))
            }
            ExprKind::Cast {
                to,
                kind,
                explicit,
                operand,
            } => {
                let (pre, o) = self.value(*operand);
                (
                    pre,
                    rebuild(ExprKind::Cast {
                        to,
                        kind,
                        explicit,
                        operand: Box::new(o),
                    }),
                )
            }
            ExprKind::Assign(ref x, _) | ExprKind::CompoundAssign(_, ref x, _) => {
                let x = x.clone();
                let e = Expr { kind: e.kind, ty, loc: loc.clone() };
                let pre = self.effect(e);
                (pre, Expr::var(&x, ty.expect("typed"), loc))
            }
            kind @ (ExprKind::Logical(..) | ExprKind::Conditional(..)) => {
                let ty = ty.expect("typed");
                let (t, decl) = self.temp(ty, None, &loc);
                let mut pre = vec![decl];
                pre.extend(self.assign_branching(&t, ty, Expr::typed(kind, ty, loc.clone()), &loc));
                (pre, Expr::var(&t, ty, loc))
            }
        }
    }

    /// Lowers operands left to right. An operand whose value could be
    /// changed by a later operand's side effects is saved in a temporary.
    fn values_seq(&mut self, exprs: Vec<Expr>, loc: &SourceLoc) -> (Vec<Stmt>, Vec<Expr>) {
        let lowered: Vec<_> = exprs.into_iter().map(|e| self.value(e)).collect();
        let n = lowered.len();
        let later_effects: Vec<bool> = (0..n)
            .map(|i| lowered[i + 1..].iter().any(|(p, _)| !p.is_empty()))
            .collect();
        let mut pre = Vec::new();
        let mut vals = Vec::new();
        for (i, (p, v)) in lowered.into_iter().enumerate() {
            pre.extend(p);
            if later_effects[i] && !is_literal(&v) {
                let ty = v.ty();
                let (t, decl) = self.temp(ty, Some(v), loc);
                pre.push(decl);
                vals.push(Expr::var(&t, ty, loc.clone()));
            } else {
                vals.push(v);
            }
        }
        (pre, vals)
    }

    /// `if (cond) then_branch else else_branch` with a compound condition,
    /// lowered into nested ifs and forward gotos.
    fn branch(&mut self, cond: Expr, then_branch: Vec<Stmt>, else_branch: Option<Vec<Stmt>>, loc: &SourceLoc) -> Vec<Stmt> {
        match cond.kind {
            ExprKind::Logical(LogicalOp::And, a, b) => match else_branch {
                None => {
                    let inner = self.branch(*b, then_branch, None, loc);
                    self.branch(*a, inner, None, loc)
                }
                Some(else_branch) => {
                    let end = self.fresh.label();
                    let mut then_branch = then_branch;
                    then_branch.push(goto(&end, loc));
                    let inner = self.branch(*b, then_branch, None, loc);
                    let mut out = self.branch(*a, inner, None, loc);
                    out.extend(else_branch);
                    out.push(label(&end, loc));
                    out
                }
            },
            ExprKind::Logical(LogicalOp::Or, a, b) => {
                // Both operands false: run the else part and skip the then part.
                let end = self.fresh.label();
                let both_false = Expr::typed(
                    ExprKind::Logical(LogicalOp::And, Box::new(negate(*a)), Box::new(negate(*b))),
                    CType::INT,
                    cond.loc.clone(),
                );
                let mut skip = else_branch.unwrap_or_default();
                skip.push(goto(&end, loc));
                let mut out = self.branch(both_false, skip, None, loc);
                out.extend(then_branch);
                out.push(label(&end, loc));
                out
            }
            ExprKind::Unary(UnaryOp::Not, a) if matches!(a.kind, ExprKind::Logical(..) | ExprKind::Unary(UnaryOp::Not, _)) => {
                self.branch(negate(*a), then_branch, else_branch, loc)
            }
            kind => {
                let cond = Expr { kind, ..cond };
                let (mut pre, v) = self.value(cond);
                pre.push(stmt(
                    StmtKind::If {
                        cond: canonical(v),
                        then_branch,
                        else_branch,
                    },
                    loc,
                ));
                pre
            }
        }
    }

    fn switch(&mut self, scrutinee: Expr, body: Vec<Stmt>, loc: &SourceLoc) -> Vec<Stmt> {
        let (mut pre, v) = self.value(scrutinee);
        let v = if v.as_var().is_some() || is_literal(&v) {
            v
        } else {
            let ty = v.ty();
            let (t, decl) = self.temp(ty, Some(v), loc);
            pre.push(decl);
            Expr::var(&t, ty, loc.clone())
        };

        let groups = split_groups(body);
        let end = self.fresh.label();
        let structured = groups.iter().enumerate().all(|(i, g)| {
            !g.labels.is_empty() && (i + 1 == groups.len() || matches!(g.body.last(), Some(s) if matches!(s.kind, StmtKind::Break)))
        });

        let case_test = |c: i128| {
            let lit = Expr::int(c, CType::INT, loc.clone());
            make_binary(BinaryOp::Eq, v.clone(), lit, loc.clone()).expect("case comparison is well typed")
        };
        let mut raw = pre;
        let mut used_end = false;
        if structured {
            let mut default_body = None;
            let mut arms = Vec::new();
            for mut g in groups {
                if matches!(g.body.last(), Some(s) if matches!(s.kind, StmtKind::Break)) {
                    g.body.pop();
                }
                used_end |= replace_breaks(&mut g.body, &end);
                if g.labels.contains(&None) {
                    default_body = Some(g.body);
                } else {
                    let test = g
                        .labels
                        .iter()
                        .map(|c| case_test(c.expect("non-default label")))
                        .reduce(|a, b| {
                            let l = a.loc.clone();
                            Expr::typed(ExprKind::Logical(LogicalOp::Or, Box::new(a), Box::new(b)), CType::INT, l)
                        })
                        .expect("group has labels");
                    arms.push((test, g.body));
                }
            }
            let mut acc = default_body;
            for (test, body) in arms.into_iter().rev() {
                acc = Some(vec![stmt(
                    StmtKind::If {
                        cond: test,
                        then_branch: body,
                        else_branch: acc,
                    },
                    loc,
                )]);
            }
            raw.extend(acc.unwrap_or_default());
        } else {
            let mut default_label = None;
            let mut code = Vec::new();
            for mut g in groups {
                if !g.labels.is_empty() {
                    let l = self.fresh.label();
                    for c in &g.labels {
                        match c {
                            Some(c) => raw.push(stmt(
                                StmtKind::If {
                                    cond: case_test(*c),
                                    then_branch: vec![goto(&l, loc)],
                                    else_branch: None,
                                },
                                loc,
                            )),
                            None => default_label = Some(l.clone()),
                        }
                    }
                    code.push(label(&l, loc));
                }
                used_end |= replace_breaks(&mut g.body, &end);
                code.extend(g.body);
            }
            match default_label {
                Some(l) => raw.push(goto(&l, loc)),
                None => {
                    raw.push(goto(&end, loc));
                    used_end = true;
                }
            }
            raw.extend(code);
        }
        if used_end {
            raw.push(label(&end, loc));
        }
        self.stmts(raw)
    }
}

fn peel_owned(mut e: Expr) -> Expr {
    while let ExprKind::Cast { explicit: false, .. } = e.kind {
        let ExprKind::Cast { operand, .. } = e.kind else { unreachable!() };
        e = *operand;
    }
    e
}

struct CaseGroup {
    /// `None` stands for `default`.
    labels: Vec<Option<i128>>,
    body: Vec<Stmt>,
}

fn split_groups(body: Vec<Stmt>) -> Vec<CaseGroup> {
    let mut groups: Vec<CaseGroup> = Vec::new();
    let mut at_label = false;
    for s in body {
        let label = match s.kind {
            StmtKind::Case(v) => Some(Some(v)),
            StmtKind::Default => Some(None),
            _ => None,
        };
        match label {
            Some(l) => {
                if !at_label {
                    groups.push(CaseGroup {
                        labels: Vec::new(),
                        body: Vec::new(),
                    });
                }
                groups.last_mut().unwrap().labels.push(l);
                at_label = true;
            }
            None => {
                if groups.is_empty() {
                    groups.push(CaseGroup {
                        labels: Vec::new(),
                        body: Vec::new(),
                    });
                }
                groups.last_mut().unwrap().body.push(s);
                at_label = false;
            }
        }
    }
    groups
}
