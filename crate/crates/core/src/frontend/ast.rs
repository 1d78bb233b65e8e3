//! Typed abstract syntax for the analyzed C subset.

use std::fmt;

use crate::frontend::types::{CType, SourceLoc};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Plus,
    Minus,
    PreInc,
    PostInc,
    PreDec,
    PostDec,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinaryOp {
    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne
        )
    }

    pub fn is_shift(self) -> bool {
        matches!(self, BinaryOp::Shl | BinaryOp::Shr)
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem
        )
    }

    /// Logical negation of a relational operator (`<` becomes `>=`).
    pub fn negate(self) -> BinaryOp {
        match self {
            BinaryOp::Lt => BinaryOp::Ge,
            BinaryOp::Le => BinaryOp::Gt,
            BinaryOp::Gt => BinaryOp::Le,
            BinaryOp::Ge => BinaryOp::Lt,
            BinaryOp::Eq => BinaryOp::Ne,
            BinaryOp::Ne => BinaryOp::Eq,
            other => other,
        }
    }

    /// Operator with operands swapped (`a < b` is `b > a`).
    pub fn mirror(self) -> BinaryOp {
        match self {
            BinaryOp::Lt => BinaryOp::Gt,
            BinaryOp::Le => BinaryOp::Ge,
            BinaryOp::Gt => BinaryOp::Lt,
            BinaryOp::Ge => BinaryOp::Le,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
        }
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalOp {
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CastKind {
    IntegralCast,
    FloatingCast,
    IntegralToFloating,
    FloatingToIntegral,
}

impl CastKind {
    pub fn between(from: CType, to: CType) -> CastKind {
        match (from.is_real(), to.is_real()) {
            (false, false) => CastKind::IntegralCast,
            (true, true) => CastKind::FloatingCast,
            (false, true) => CastKind::IntegralToFloating,
            (true, false) => CastKind::FloatingToIntegral,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    IntLit(i128),
    /// Exact value plus the source spelling (used when printing).
    RealLit(Rational, String),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Logical(LogicalOp, Box<Expr>, Box<Expr>),
    Conditional(Box<Expr>, Box<Expr>, Box<Expr>),
    Assign(String, Box<Expr>),
    CompoundAssign(BinaryOp, String, Box<Expr>),
    Cast {
        to: CType,
        kind: CastKind,
        explicit: bool,
        operand: Box<Expr>,
    },
}

/// An expression node. `ty` is filled in by the type checker.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Option<CType>,
    pub loc: SourceLoc,
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLoc) -> Self {
        Expr { kind, ty: None, loc }
    }

    pub fn typed(kind: ExprKind, ty: CType, loc: SourceLoc) -> Self {
        Expr {
            kind,
            ty: Some(ty),
            loc,
        }
    }

    /// Resolved type. Panics on an expression that was never type checked.
    pub fn ty(&self) -> CType {
        self.ty.expect("expression has not been type checked")
    }

    pub fn int(v: i128, ty: CType, loc: SourceLoc) -> Self {
        Expr::typed(ExprKind::IntLit(v), ty, loc)
    }

    pub fn var(name: &str, ty: CType, loc: SourceLoc) -> Self {
        Expr::typed(ExprKind::Var(name.to_string()), ty, loc)
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i128> {
        match &self.kind {
            ExprKind::IntLit(v) => Some(*v),
            _ => None,
        }
    }

    /// Strips implicit casts.
    pub fn peel_implicit(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Cast {
            explicit: false,
            operand,
            ..
        } = &e.kind
        {
            e = operand;
        }
        e
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::IntLit(_) | ExprKind::RealLit(..) | ExprKind::Var(_) => vec![],
            ExprKind::Unary(_, a) | ExprKind::Assign(_, a) | ExprKind::CompoundAssign(_, _, a) => {
                vec![a]
            }
            ExprKind::Cast { operand, .. } => vec![operand],
            ExprKind::Binary(_, a, b) | ExprKind::Logical(_, a, b) => vec![a, b],
            ExprKind::Conditional(c, a, b) => vec![c, a, b],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::IntLit(_) | ExprKind::RealLit(..) | ExprKind::Var(_) => vec![],
            ExprKind::Unary(_, a) | ExprKind::Assign(_, a) | ExprKind::CompoundAssign(_, _, a) => {
                vec![a]
            }
            ExprKind::Cast { operand, .. } => vec![operand],
            ExprKind::Binary(_, a, b) | ExprKind::Logical(_, a, b) => vec![a, b],
            ExprKind::Conditional(c, a, b) => vec![c, a, b],
        }
    }

    /// Pre-order walk over this expression and all sub-expressions.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// Variables read by this expression (assignment targets of compound
    /// assignments count as reads).
    pub fn reads(&self) -> Vec<(&str, &SourceLoc)> {
        let mut out = Vec::new();
        self.walk(&mut |e| match &e.kind {
            ExprKind::Var(v) => out.push((v.as_str(), &e.loc)),
            ExprKind::CompoundAssign(_, v, _) => out.push((v.as_str(), &e.loc)),
            ExprKind::Unary(
                UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec,
                _,
            ) => {}
            _ => {}
        });
        out
    }

    pub fn has_side_effects(&self) -> bool {
        self.any(&|e| {
            matches!(
                e.kind,
                ExprKind::Assign(..)
                    | ExprKind::CompoundAssign(..)
                    | ExprKind::Unary(
                        UnaryOp::PreInc | UnaryOp::PostInc | UnaryOp::PreDec | UnaryOp::PostDec,
                        _
                    )
            )
        })
    }

    pub fn is_relational(&self) -> bool {
        matches!(&self.kind, ExprKind::Binary(op, ..) if op.is_relational())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Decl {
        name: String,
        ty: CType,
        init: Option<Expr>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    DoWhile {
        body: Vec<Stmt>,
        cond: Expr,
    },
    For {
        init: Vec<Stmt>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Vec<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        body: Vec<Stmt>,
    },
    Case(i128),
    Default,
    Break,
    Goto(String),
    Label(String),
    Assert(Expr),
    Return(Option<Expr>),
    Block(Vec<Stmt>),
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

impl Stmt {
    pub fn new(kind: StmtKind, loc: SourceLoc) -> Self {
        Stmt { kind, loc }
    }

    /// Expressions held directly by this statement (not by nested statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Decl { init: Some(e), .. }
            | StmtKind::Expr(e)
            | StmtKind::Assert(e)
            | StmtKind::Return(Some(e))
            | StmtKind::If { cond: e, .. }
            | StmtKind::While { cond: e, .. }
            | StmtKind::DoWhile { cond: e, .. }
            | StmtKind::Switch { scrutinee: e, .. } => vec![e],
            StmtKind::For { cond, step, .. } => cond.iter().chain(step.iter()).collect(),
            _ => vec![],
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Decl { init: Some(e), .. }
            | StmtKind::Expr(e)
            | StmtKind::Assert(e)
            | StmtKind::Return(Some(e))
            | StmtKind::If { cond: e, .. }
            | StmtKind::While { cond: e, .. }
            | StmtKind::DoWhile { cond: e, .. }
            | StmtKind::Switch { scrutinee: e, .. } => vec![e],
            StmtKind::For { cond, step, .. } => cond.iter_mut().chain(step.iter_mut()).collect(),
            _ => vec![],
        }
    }

    /// Nested statement lists, in source order.
    pub fn bodies(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::Switch { body, .. }
            | StmtKind::Block(body) => vec![body],
            StmtKind::For { init, body, .. } => vec![init, body],
            _ => vec![],
        }
    }

    pub fn bodies_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::Switch { body, .. }
            | StmtKind::Block(body) => vec![body],
            StmtKind::For { init, body, .. } => vec![init, body],
            _ => vec![],
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. }
        )
    }

    /// Pre-order walk over this statement and every nested statement.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for body in self.bodies() {
            for s in body {
                s.walk(f);
            }
        }
    }

    pub fn contains_label(&self, label: &str) -> bool {
        let mut found = false;
        self.walk(&mut |s| {
            if matches!(&s.kind, StmtKind::Label(l) if l == label) {
                found = true;
            }
        });
        found
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub return_type: Option<CType>,
    pub body: Vec<Stmt>,
    /// Flattened variable set, in declaration order. Filled by the type checker.
    pub variables: Vec<(String, CType)>,
    pub loc: SourceLoc,
}

impl Function {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for s in &self.body {
            s.walk(f);
        }
    }

    pub fn var_type(&self, name: &str) -> Option<CType> {
        self.variables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }

    /// Copy with every location replaced by a fixed placeholder, for
    /// structural comparisons.
    pub fn without_locs(&self) -> Function {
        let mut f = self.clone();
        let loc = SourceLoc::synthetic();
        f.loc = loc.clone();
        for s in &mut f.body {
            erase_stmt(s, &loc);
        }
        f
    }
}

fn erase_expr(e: &mut Expr, loc: &SourceLoc) {
    e.loc = loc.clone();
    for c in e.children_mut() {
        erase_expr(c, loc);
    }
}

fn erase_stmt(s: &mut Stmt, loc: &SourceLoc) {
    s.loc = loc.clone();
    for e in s.exprs_mut() {
        erase_expr(e, loc);
    }
    for body in s.bodies_mut() {
        for c in body {
            erase_stmt(c, loc);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub functions: Vec<Function>,
}
