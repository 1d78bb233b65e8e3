//! Name resolution, scope flattening and type annotation.
//!
//! Inner declarations that reuse a name already seen in the function are
//! renamed `name$k`, giving the analyzer one flat variable environment.

use std::collections::{HashMap, HashSet};

use crate::frontend::ast::*;
use crate::frontend::types::{CType, SourceLoc};
use crate::frontend::FrontendError;

pub fn typecheck(mut f: Function) -> Result<Function, FrontendError> {
    check_labels(&f)?;
    let mut tc = Checker {
        scopes: vec![HashMap::new()],
        used: HashSet::new(),
        variables: Vec::new(),
        return_type: f.return_type,
    };
    let body = std::mem::take(&mut f.body);
    f.body = tc.stmts(body)?;
    f.variables = tc.variables;
    Ok(f)
}

struct Checker {
    scopes: Vec<HashMap<String, (String, CType)>>,
    used: HashSet<String>,
    variables: Vec<(String, CType)>,
    return_type: Option<CType>,
}

fn type_error(loc: &SourceLoc, message: impl Into<String>) -> FrontendError {
    FrontendError::TypeError {
        loc: loc.clone(),
        message: message.into(),
    }
}

/// Wraps `e` in an implicit cast to `to` unless it already has that type.
pub fn coerce(e: Expr, to: CType) -> Expr {
    let to = to.unqualified();
    let from = e.ty().unqualified();
    if from == to {
        return e;
    }
    let loc = e.loc.clone();
    Expr::typed(
        ExprKind::Cast {
            to,
            kind: CastKind::between(from, to),
            explicit: false,
            operand: Box::new(e),
        },
        to,
        loc,
    )
}

/// Type in which `target op= rhs` is computed.
pub fn compound_type(op: BinaryOp, target: CType, rhs: CType) -> CType {
    if op.is_shift() {
        target.promote()
    } else {
        CType::usual_conversion(target, rhs)
    }
}

/// Builds a typed binary node, inserting the usual conversions.
pub fn make_binary(op: BinaryOp, l: Expr, r: Expr, loc: SourceLoc) -> Result<Expr, FrontendError> {
    let (lt, rt) = (l.ty(), r.ty());
    if op.is_shift() {
        if lt.is_real() || rt.is_real() {
            return Err(type_error(&loc, "shift operands must be integral"));
        }
        let ty = lt.promote();
        let l = coerce(l, ty);
        let r = coerce(r, rt.promote());
        return Ok(Expr::typed(ExprKind::Binary(op, Box::new(l), Box::new(r)), ty, loc));
    }
    if op == BinaryOp::Rem && (lt.is_real() || rt.is_real()) {
        return Err(type_error(&loc, "operands of % must be integral"));
    }
    let common = CType::usual_conversion(lt, rt);
    let ty = if op.is_relational() { CType::INT } else { common };
    Ok(Expr::typed(
        ExprKind::Binary(op, Box::new(coerce(l, common)), Box::new(coerce(r, common))),
        ty,
        loc,
    ))
}

/// Builds a typed `!e`.
pub fn make_not(e: Expr, loc: SourceLoc) -> Expr {
    Expr::typed(ExprKind::Unary(UnaryOp::Not, Box::new(e)), CType::INT, loc)
}

/// Builds `e != 0` with a zero of the right type.
pub fn make_nonzero(e: Expr) -> Expr {
    let loc = e.loc.clone();
    let zero = Expr::int(0, CType::INT, loc.clone());
    make_binary(BinaryOp::Ne, e, zero, loc).expect("comparison with zero is always well typed")
}

/// Builds a typed `x = e`, converting `e` to the variable type.
pub fn make_assign(name: &str, ty: CType, e: Expr, loc: SourceLoc) -> Expr {
    let ty = ty.unqualified();
    Expr::typed(ExprKind::Assign(name.to_string(), Box::new(coerce(e, ty))), ty, loc)
}

/// Builds a typed `x op= e`.
pub fn make_compound(op: BinaryOp, name: &str, ty: CType, e: Expr, loc: SourceLoc) -> Expr {
    let ty = ty.unqualified();
    let rt = if op.is_shift() {
        e.ty().promote()
    } else {
        compound_type(op, ty, e.ty())
    };
    Expr::typed(
        ExprKind::CompoundAssign(op, name.to_string(), Box::new(coerce(e, rt))),
        ty,
        loc,
    )
}

fn check_labels(f: &Function) -> Result<(), FrontendError> {
    let mut labels = HashSet::new();
    let mut result = Ok(());
    f.walk(&mut |s| {
        if let StmtKind::Label(l) = &s.kind {
            if !labels.insert(l.clone()) && result.is_ok() {
                result = Err(FrontendError::Redeclaration {
                    loc: s.loc.clone(),
                    name: l.clone(),
                });
            }
        }
    });
    result?;
    let mut order = Vec::new();
    collect_goto_structure(&f.body, &mut Vec::new(), &mut 0, &mut order);
    for (i, item) in order.iter().enumerate() {
        let GotoItem::Goto(name, loc, loops) = item else { continue };
        let Some(target) = order.iter().position(|o| matches!(o, GotoItem::Label(n, _) if n == name)) else {
            return Err(FrontendError::UndefinedLabel {
                loc: loc.clone(),
                name: name.clone(),
            });
        };
        if target < i {
            return Err(FrontendError::UnsupportedFeature {
                loc: loc.clone(),
                name: "backward goto".into(),
            });
        }
        let GotoItem::Label(_, label_loops) = &order[target] else { unreachable!() };
        if !label_loops.iter().all(|l| loops.contains(l)) {
            return Err(FrontendError::UnsupportedFeature {
                loc: loc.clone(),
                name: "goto into a loop body".into(),
            });
        }
    }
    Ok(())
}

enum GotoItem {
    Goto(String, SourceLoc, Vec<usize>),
    Label(String, Vec<usize>),
}

/// Gotos and labels in source order, each with the stack of enclosing loops.
fn collect_goto_structure(body: &[Stmt], loops: &mut Vec<usize>, next_loop: &mut usize, out: &mut Vec<GotoItem>) {
    for s in body {
        match &s.kind {
            StmtKind::Goto(l) => out.push(GotoItem::Goto(l.clone(), s.loc.clone(), loops.clone())),
            StmtKind::Label(l) => out.push(GotoItem::Label(l.clone(), loops.clone())),
            _ => {}
        }
        let is_loop = s.is_loop();
        if is_loop {
            loops.push(*next_loop);
            *next_loop += 1;
        }
        for b in s.bodies() {
            collect_goto_structure(b, loops, next_loop, out);
        }
        if is_loop {
            loops.pop();
        }
    }
}

impl Checker {
    fn lookup(&self, name: &str, loc: &SourceLoc) -> Result<(String, CType), FrontendError> {
        for scope in self.scopes.iter().rev() {
            if let Some(v) = scope.get(name) {
                return Ok(v.clone());
            }
        }
        Err(FrontendError::UndeclaredVariable {
            loc: loc.clone(),
            name: name.to_string(),
        })
    }

    fn declare(&mut self, name: &str, ty: CType, loc: &SourceLoc) -> Result<String, FrontendError> {
        let scope = self.scopes.last_mut().expect("scope stack is never empty");
        if scope.contains_key(name) {
            return Err(FrontendError::Redeclaration {
                loc: loc.clone(),
                name: name.to_string(),
            });
        }
        let mut flat = name.to_string();
        let mut k = 1;
        while self.used.contains(&flat) {
            flat = format!("{name}${k}");
            k += 1;
        }
        self.used.insert(flat.clone());
        scope.insert(name.to_string(), (flat.clone(), ty));
        self.variables.push((flat.clone(), ty));
        Ok(flat)
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, FrontendError>) -> Result<T, FrontendError> {
        self.scopes.push(HashMap::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn stmts(&mut self, body: Vec<Stmt>) -> Result<Vec<Stmt>, FrontendError> {
        body.into_iter().map(|s| self.stmt(s)).collect()
    }

    fn scalar_cond(&mut self, e: Expr) -> Result<Expr, FrontendError> {
        self.expr(e)
    }

    fn stmt(&mut self, s: Stmt) -> Result<Stmt, FrontendError> {
        let loc = s.loc;
        let kind = match s.kind {
            StmtKind::Decl { name, ty, init } => {
                // The initializer is resolved before the name comes into scope.
                let init = match init {
                    Some(e) => Some(coerce(self.expr(e)?, ty)),
                    None => None,
                };
                let name = self.declare(&name, ty, &loc)?;
                StmtKind::Decl { name, ty, init }
            }
            StmtKind::Expr(e) => StmtKind::Expr(self.expr(e)?),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond = self.scalar_cond(cond)?;
                let then_branch = self.scoped(|c| c.stmts(then_branch))?;
                let else_branch = match else_branch {
                    Some(b) => Some(self.scoped(|c| c.stmts(b))?),
                    None => None,
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            StmtKind::While { cond, body } => {
                let cond = self.scalar_cond(cond)?;
                let body = self.scoped(|c| c.stmts(body))?;
                StmtKind::While { cond, body }
            }
            StmtKind::DoWhile { body, cond } => {
                let body = self.scoped(|c| c.stmts(body))?;
                let cond = self.scalar_cond(cond)?;
                StmtKind::DoWhile { body, cond }
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|c| {
                let init = c.stmts(init)?;
                let cond = cond.map(|e| c.scalar_cond(e)).transpose()?;
                let step = step.map(|e| c.expr(e)).transpose()?;
                let body = c.scoped(|c| c.stmts(body))?;
                Ok(StmtKind::For {
                    init,
                    cond,
                    step,
                    body,
                })
            })?,
            StmtKind::Switch { scrutinee, body } => {
                let scrutinee = self.expr(scrutinee)?;
                if scrutinee.ty().is_real() {
                    return Err(type_error(&loc, "switch on a non-integral value"));
                }
                let scrutinee = coerce(scrutinee.clone(), scrutinee.ty().promote());
                let mut seen = HashSet::new();
                let mut defaults = 0;
                for c in &body {
                    match c.kind {
                        StmtKind::Case(v) if !seen.insert(v) => {
                            return Err(type_error(&c.loc, format!("duplicate case value {v}")))
                        }
                        StmtKind::Default => defaults += 1,
                        _ => {}
                    }
                }
                if defaults > 1 {
                    return Err(type_error(&loc, "multiple default labels"));
                }
                if body
                    .iter()
                    .any(|s| s.bodies().iter().any(|b| b.iter().any(has_case)))
                {
                    return Err(FrontendError::UnsupportedFeature {
                        loc,
                        name: "case labels nested inside other statements".into(),
                    });
                }
                let body = self.scoped(|c| c.stmts(body))?;
                StmtKind::Switch { scrutinee, body }
            }
            StmtKind::Assert(e) => StmtKind::Assert(self.scalar_cond(e)?),
            StmtKind::Return(value) => match (value, self.return_type) {
                (Some(e), Some(t)) => StmtKind::Return(Some(coerce(self.expr(e)?, t))),
                (Some(e), None) => return Err(type_error(&e.loc, "void function returns a value")),
                (None, _) => StmtKind::Return(None),
            },
            StmtKind::Block(body) => StmtKind::Block(self.scoped(|c| c.stmts(body))?),
            k @ (StmtKind::Case(_)
            | StmtKind::Default
            | StmtKind::Break
            | StmtKind::Goto(_)
            | StmtKind::Label(_)
            | StmtKind::Empty) => k,
        };
        Ok(Stmt::new(kind, loc))
    }

    fn assignable(&self, name: &str, loc: &SourceLoc) -> Result<(String, CType), FrontendError> {
        let (flat, ty) = self.lookup(name, loc)?;
        if ty.is_const {
            return Err(type_error(loc, format!("assignment to const variable `{name}`")));
        }
        Ok((flat, ty))
    }

    pub fn expr(&mut self, e: Expr) -> Result<Expr, FrontendError> {
        let loc = e.loc;
        match e.kind {
            ExprKind::IntLit(_) | ExprKind::RealLit(..) => {
                let ty = e.ty.expect("literals are typed by the lexer");
                Ok(Expr::typed(e.kind, ty, loc))
            }
            ExprKind::Var(name) => {
                let (flat, ty) = self.lookup(&name, &loc)?;
                Ok(Expr::typed(ExprKind::Var(flat), ty.unqualified(), loc))
            }
            ExprKind::Unary(op, operand) => match op {
                UnaryOp::Plus | UnaryOp::Minus => {
                    let a = self.expr(*operand)?;
                    let ty = a.ty().promote();
                    Ok(Expr::typed(ExprKind::Unary(op, Box::new(coerce(a, ty))), ty, loc))
                }
                UnaryOp::Not => {
                    let a = self.expr(*operand)?;
                    Ok(make_not(a, loc))
                }
                UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec => {
                    let name = operand.as_var().expect("parser only accepts variables here").to_string();
                    let (flat, ty) = self.assignable(&name, &operand.loc)?;
                    let ty = ty.unqualified();
                    let a = Expr::var(&flat, ty, operand.loc.clone());
                    Ok(Expr::typed(ExprKind::Unary(op, Box::new(a)), ty, loc))
                }
            },
            ExprKind::Binary(op, l, r) => {
                let l = self.expr(*l)?;
                let r = self.expr(*r)?;
                make_binary(op, l, r, loc)
            }
            ExprKind::Logical(op, l, r) => {
                let l = self.expr(*l)?;
                let r = self.expr(*r)?;
                Ok(Expr::typed(ExprKind::Logical(op, Box::new(l), Box::new(r)), CType::INT, loc))
            }
            ExprKind::Conditional(c, a, b) => {
                let c = self.expr(*c)?;
                let a = self.expr(*a)?;
                let b = self.expr(*b)?;
                let ty = CType::usual_conversion(a.ty(), b.ty());
                Ok(Expr::typed(
                    ExprKind::Conditional(Box::new(c), Box::new(coerce(a, ty)), Box::new(coerce(b, ty))),
                    ty,
                    loc,
                ))
            }
            ExprKind::Assign(name, value) => {
                let (flat, ty) = self.assignable(&name, &loc)?;
                let value = self.expr(*value)?;
                Ok(make_assign(&flat, ty, value, loc))
            }
            ExprKind::CompoundAssign(op, name, value) => {
                let (flat, ty) = self.assignable(&name, &loc)?;
                let value = self.expr(*value)?;
                if (op.is_shift() || op == BinaryOp::Rem) && (ty.is_real() || value.ty().is_real()) {
                    return Err(type_error(&loc, format!("operands of {}= must be integral", op.symbol())));
                }
                Ok(make_compound(op, &flat, ty, value, loc))
            }
            ExprKind::Cast { to, operand, .. } => {
                let a = self.expr(*operand)?;
                let to = to.unqualified();
                Ok(Expr::typed(
                    ExprKind::Cast {
                        to,
                        kind: CastKind::between(a.ty(), to),
                        explicit: true,
                        operand: Box::new(a),
                    },
                    to,
                    loc,
                ))
            }
        }
    }
}

fn has_case(s: &Stmt) -> bool {
    let mut found = false;
    s.walk(&mut |s| {
        if matches!(s.kind, StmtKind::Case(_) | StmtKind::Default) {
            found = true;
        }
    });
    found
}
