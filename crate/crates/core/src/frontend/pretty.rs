//! C text rendering of the AST with minimal, precedence-aware parentheses.

use std::fmt::Write;

use crate::frontend::ast::*;
use crate::frontend::types::{CType, TypeKind};

#[derive(Clone, Copy, Debug, Default)]
pub struct PrettyOptions {
    /// Print implicit conversions as explicit casts.
    pub show_implicit_casts: bool,
}

pub fn program(p: &Program, opts: PrettyOptions) -> String {
    let mut out = String::new();
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&function(f, opts));
    }
    out
}

pub fn function(f: &Function, opts: PrettyOptions) -> String {
    let mut p = Printer { out: String::new(), opts };
    let ret = f.return_type.map_or("void".to_string(), |t| t.spelling());
    let _ = writeln!(p.out, "{ret} {}(void)", f.name);
    p.out.push_str("{\n");
    p.stmts(&f.body, 1);
    p.out.push_str("}\n");
    p.out
}

pub fn expr(e: &Expr, opts: PrettyOptions) -> String {
    let p = Printer { out: String::new(), opts };
    p.expr(e, 0)
}

pub fn stmt(s: &Stmt, opts: PrettyOptions) -> String {
    let mut p = Printer { out: String::new(), opts };
    p.stmt(s, 0);
    p.out.trim_end().to_string()
}

/// Statement text on a single line, as used in CFG dumps.
pub fn stmt_inline(s: &Stmt) -> String {
    stmt(s, PrettyOptions::default())
        .lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" ")
}

struct Printer {
    out: String,
    opts: PrettyOptions,
}

const ASSIGN: u8 = 1;
const COND: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 10;
const POSTFIX: u8 = 11;
const PRIMARY: u8 = 12;

fn binary_prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Eq | BinaryOp::Ne => 5,
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 6,
        BinaryOp::Shl | BinaryOp::Shr => 7,
        BinaryOp::Add | BinaryOp::Sub => 8,
        BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 9,
    }
}

fn int_literal(v: i128, ty: Option<CType>) -> String {
    let suffix = match ty {
        Some(t) => match (t.kind, t.signed) {
            (TypeKind::Long, true) => "l",
            (TypeKind::Long, false) => "ul",
            (TypeKind::LongLong, true) => "ll",
            (TypeKind::LongLong, false) => "ull",
            (_, false) => "u",
            _ => "",
        },
        None => "",
    };
    format!("{v}{suffix}")
}

impl Printer {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
    }

    fn stmts(&mut self, body: &[Stmt], depth: usize) {
        for s in body {
            self.stmt(s, depth);
        }
    }

    fn braced(&mut self, body: &[Stmt], depth: usize) {
        self.out.push_str("{\n");
        self.stmts(body, depth + 1);
        self.indent(depth);
        self.out.push('}');
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        // Labels sit one level out, like most C code styles.
        if let StmtKind::Label(l) = &s.kind {
            self.indent(depth.saturating_sub(1));
            let _ = writeln!(self.out, "{l}:");
            return;
        }
        self.indent(depth);
        match &s.kind {
            StmtKind::Decl { name, ty, init } => {
                let _ = write!(self.out, "{} {name}", ty.spelling());
                if let Some(e) = init {
                    let _ = write!(self.out, " = {}", self.expr(e, ASSIGN));
                }
                self.out.push_str(";\n");
            }
            StmtKind::Expr(e) => {
                let _ = writeln!(self.out, "{};", self.expr(e, 0));
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = write!(self.out, "if ({}) ", self.expr(cond, 0));
                self.braced(then_branch, depth);
                if let Some(b) = else_branch {
                    self.out.push_str(" else ");
                    self.braced(b, depth);
                }
                self.out.push('\n');
            }
            StmtKind::While { cond, body } => {
                let _ = write!(self.out, "while ({}) ", self.expr(cond, 0));
                self.braced(body, depth);
                self.out.push('\n');
            }
            StmtKind::DoWhile { body, cond } => {
                self.out.push_str("do ");
                self.braced(body, depth);
                let _ = writeln!(self.out, " while ({});", self.expr(cond, 0));
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                self.out.push_str("for (");
                match init.as_slice() {
                    [] => self.out.push(';'),
                    [Stmt {
                        kind: StmtKind::Expr(e),
                        ..
                    }] => {
                        let _ = write!(self.out, "{};", self.expr(e, 0));
                    }
                    decls => {
                        // Declaration lists share one specifier.
                        let mut parts = Vec::new();
                        let mut spec = String::new();
                        for d in decls {
                            if let StmtKind::Decl { name, ty, init } = &d.kind {
                                spec = ty.spelling();
                                parts.push(match init {
                                    Some(e) => format!("{name} = {}", self.expr(e, ASSIGN)),
                                    None => name.clone(),
                                });
                            }
                        }
                        let _ = write!(self.out, "{spec} {};", parts.join(", "));
                    }
                }
                if let Some(c) = cond {
                    let _ = write!(self.out, " {}", self.expr(c, 0));
                }
                self.out.push(';');
                if let Some(st) = step {
                    let _ = write!(self.out, " {}", self.expr(st, 0));
                }
                self.out.push_str(") ");
                self.braced(body, depth);
                self.out.push('\n');
            }
            StmtKind::Switch { scrutinee, body } => {
                let _ = write!(self.out, "switch ({}) ", self.expr(scrutinee, 0));
                self.braced(body, depth);
                self.out.push('\n');
            }
            StmtKind::Case(v) => {
                let _ = writeln!(self.out, "case {v}:");
            }
            StmtKind::Default => self.out.push_str("default:\n"),
            StmtKind::Break => self.out.push_str("break;\n"),
            StmtKind::Goto(l) => {
                let _ = writeln!(self.out, "goto {l};");
            }
            StmtKind::Label(_) => unreachable!(),
            StmtKind::Assert(e) => {
                let _ = writeln!(self.out, "MYASSERT({});", self.expr(e, 0));
            }
            StmtKind::Return(None) => self.out.push_str("return;\n"),
            StmtKind::Return(Some(e)) => {
                let _ = writeln!(self.out, "return {};", self.expr(e, 0));
            }
            StmtKind::Block(body) => {
                self.braced(body, depth);
                self.out.push('\n');
            }
            StmtKind::Empty => self.out.push_str(";\n"),
        }
    }

    fn prec(&self, e: &Expr) -> u8 {
        match &e.kind {
            ExprKind::IntLit(v) if *v < 0 => UNARY,
            ExprKind::IntLit(_) | ExprKind::RealLit(..) | ExprKind::Var(_) => PRIMARY,
            ExprKind::Unary(UnaryOp::PostInc | UnaryOp::PostDec, _) => POSTFIX,
            ExprKind::Unary(..) => UNARY,
            ExprKind::Cast { explicit: false, operand, .. } if !self.opts.show_implicit_casts => self.prec(operand),
            ExprKind::Cast { .. } => UNARY,
            ExprKind::Binary(op, ..) => binary_prec(*op),
            ExprKind::Logical(LogicalOp::And, ..) => AND,
            ExprKind::Logical(LogicalOp::Or, ..) => OR,
            ExprKind::Conditional(..) => COND,
            ExprKind::Assign(..) | ExprKind::CompoundAssign(..) => ASSIGN,
        }
    }

    /// Renders `e` so that it parses back at precedence level `min` or higher.
    fn expr(&self, e: &Expr, min: u8) -> String {
        let p = self.prec(e);
        let text = self.expr_inner(e);
        if p < min {
            format!("({text})")
        } else {
            text
        }
    }

    fn expr_inner(&self, e: &Expr) -> String {
        match &e.kind {
            ExprKind::IntLit(v) => int_literal(*v, e.ty),
            ExprKind::RealLit(_, text) => text.clone(),
            ExprKind::Var(v) => v.clone(),
            ExprKind::Unary(op, a) => {
                let operand = self.expr(a, if matches!(op, UnaryOp::PostInc | UnaryOp::PostDec) { POSTFIX } else { UNARY });
                let prefix = |sym: &str| {
                    // Avoid gluing `- -x` into `--x`.
                    if operand.starts_with(sym.chars().next().unwrap()) {
                        format!("{sym} {operand}")
                    } else {
                        format!("{sym}{operand}")
                    }
                };
                match op {
                    UnaryOp::Plus => prefix("+"),
                    UnaryOp::Minus => prefix("-"),
                    UnaryOp::Not => format!("!{operand}"),
                    UnaryOp::PreInc => prefix("++"),
                    UnaryOp::PreDec => prefix("--"),
                    UnaryOp::PostInc => format!("{operand}++"),
                    UnaryOp::PostDec => format!("{operand}--"),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let p = binary_prec(*op);
                format!("{} {} {}", self.expr(l, p), op.symbol(), self.expr(r, p + 1))
            }
            ExprKind::Logical(op, l, r) => {
                let (p, sym) = match op {
                    LogicalOp::And => (AND, "&&"),
                    LogicalOp::Or => (OR, "||"),
                };
                format!("{} {sym} {}", self.expr(l, p), self.expr(r, p + 1))
            }
            ExprKind::Conditional(c, a, b) => {
                format!("{} ? {} : {}", self.expr(c, OR), self.expr(a, 0), self.expr(b, COND))
            }
            ExprKind::Assign(x, v) => format!("{x} = {}", self.expr(v, ASSIGN)),
            ExprKind::CompoundAssign(op, x, v) => format!("{x} {}= {}", op.symbol(), self.expr(v, ASSIGN)),
            ExprKind::Cast {
                to,
                explicit,
                operand,
                ..
            } => {
                if !*explicit && !self.opts.show_implicit_casts {
                    self.expr_inner(operand)
                } else {
                    format!("({}){}", to.spelling(), self.expr(operand, UNARY))
                }
            }
        }
    }
}
