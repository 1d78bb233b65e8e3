//! Literal-only constant folding and removal of unused declarations.

use std::collections::HashSet;

use crate::frontend::ast::*;
use crate::frontend::types::CType;

/// Folds integral sub-expressions whose operands are all literals. Unsigned
/// results wrap; a signed result that would overflow, or a division by
/// zero, is left as written.
pub fn fold_constants(mut f: Function) -> Function {
    for s in &mut f.body {
        fold_stmt(s);
    }
    f
}

fn fold_stmt(s: &mut Stmt) {
    for e in s.exprs_mut() {
        fold_expr(e);
    }
    if let StmtKind::For { init, .. } = &mut s.kind {
        for i in init {
            fold_stmt(i);
        }
    }
    for b in s.bodies_mut() {
        for c in b {
            fold_stmt(c);
        }
    }
}

/// Integral literal value of `e`, if it is one.
fn literal(e: &Expr) -> Option<(i128, CType)> {
    match (&e.kind, e.ty) {
        (ExprKind::IntLit(v), Some(t)) if t.is_integral() => Some((*v, t)),
        _ => None,
    }
}

/// Applies the target type's arithmetic: wrap when unsigned, reject overflow
/// when signed.
fn fit(v: i128, ty: CType) -> Option<i128> {
    if !ty.signed {
        Some(ty.wrap(v))
    } else if ty.fits(v) {
        Some(v)
    } else {
        None
    }
}

pub fn fold_expr(e: &mut Expr) {
    for c in e.children_mut() {
        fold_expr(c);
    }
    let Some(ty) = e.ty else { return };
    if !ty.is_integral() {
        return;
    }
    let folded = match &e.kind {
        ExprKind::Unary(op, a) => literal(a).and_then(|(v, _)| match op {
            UnaryOp::Plus => fit(v, ty),
            UnaryOp::Minus => fit(-v, ty),
            UnaryOp::Not => Some((v == 0) as i128),
            _ => None,
        }),
        ExprKind::Binary(op, l, r) if !op.is_relational() => match (literal(l), literal(r)) {
            (Some((a, _)), Some((b, _))) => match op {
                BinaryOp::Add => a.checked_add(b).and_then(|v| fit(v, ty)),
                BinaryOp::Sub => a.checked_sub(b).and_then(|v| fit(v, ty)),
                BinaryOp::Mul => a.checked_mul(b).and_then(|v| fit(v, ty)),
                BinaryOp::Div if b != 0 => fit(a / b, ty),
                BinaryOp::Rem if b != 0 => fit(a % b, ty),
                BinaryOp::Shl | BinaryOp::Shr => {
                    let bits = ty.bits().expect("integral") as i128;
                    if b < 0 || b >= bits || (ty.signed && a < 0) {
                        None
                    } else if *op == BinaryOp::Shl {
                        fit(a << b, ty)
                    } else {
                        fit(a >> b, ty)
                    }
                }
                _ => None,
            },
            _ => None,
        },
        ExprKind::Cast {
            kind: CastKind::IntegralCast,
            operand,
            ..
        } => literal(operand).and_then(|(v, _)| fit(v, ty)),
        _ => None,
    };
    if let Some(v) = folded {
        e.kind = ExprKind::IntLit(v);
    }
}

/// Drops declarations of variables that are never read or assigned outside
/// their own declaration. Declarations whose initializer may trap are kept.
pub fn remove_unused(mut f: Function) -> Function {
    loop {
        let mut mentioned = HashSet::new();
        f.walk(&mut |s| {
            for e in s.exprs() {
                e.walk(&mut |x| match &x.kind {
                    ExprKind::Var(v) | ExprKind::Assign(v, _) | ExprKind::CompoundAssign(_, v, _) => {
                        mentioned.insert(v.clone());
                    }
                    _ => {}
                });
            }
        });
        let removable: HashSet<String> = f
            .variables
            .iter()
            .map(|(n, _)| n.clone())
            .filter(|n| !mentioned.contains(n) && !has_keeper_decl(&f, n))
            .collect();
        if removable.is_empty() {
            return f;
        }
        f.variables.retain(|(n, _)| !removable.contains(n));
        let body = std::mem::take(&mut f.body);
        f.body = drop_decls(body, &removable);
    }
}

fn may_trap_or_write(e: &Expr) -> bool {
    e.has_side_effects() || e.any(&|x| matches!(x.kind, ExprKind::Binary(BinaryOp::Div | BinaryOp::Rem, ..)))
}

fn has_keeper_decl(f: &Function, name: &str) -> bool {
    let mut keep = false;
    f.walk(&mut |s| {
        if let StmtKind::Decl { name: n, init: Some(e), .. } = &s.kind {
            if n == name && may_trap_or_write(e) {
                keep = true;
            }
        }
    });
    keep
}

fn drop_decls(body: Vec<Stmt>, removable: &HashSet<String>) -> Vec<Stmt> {
    body.into_iter()
        .filter(|s| !matches!(&s.kind, StmtKind::Decl { name, .. } if removable.contains(name)))
        .map(|mut s| {
            for b in s.bodies_mut() {
                *b = drop_decls(std::mem::take(b), removable);
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;

    fn func(src: &str) -> Function {
        compile(&format!("int main() {{ {src} }}"), "t.c").unwrap().functions.remove(0)
    }

    fn init_of(f: &Function, idx: usize) -> &Expr {
        match &f.body[idx].kind {
            StmtKind::Decl { init: Some(e), .. } => e,
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Assign(_, v) => v,
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn literal_arithmetic_folds() {
        let f = fold_constants(func("int x; x = 1 + 1; x = 2 * (3 - 5) / 2; x = 7 % 3; x = 1 << 4;"));
        assert_eq!(init_of(&f, 1).as_int(), Some(2));
        assert_eq!(init_of(&f, 2).as_int(), Some(-2));
        assert_eq!(init_of(&f, 3).as_int(), Some(1));
        assert_eq!(init_of(&f, 4).as_int(), Some(16));
    }

    #[test]
    fn no_algebraic_identities() {
        let f = fold_constants(func("int x, y = 1; x = y + 0;"));
        assert!(matches!(init_of(&f, 2).kind, ExprKind::Binary(BinaryOp::Add, ..)));
    }

    #[test]
    fn unsigned_wraps_signed_overflow_is_kept() {
        let f = fold_constants(func("unsigned u = 0u - 1u; int x = 2147483647 + 1; int z = 1 / 0;"));
        assert_eq!(init_of(&f, 0).as_int(), Some(4294967295));
        assert_eq!(init_of(&f, 0).ty(), CType::UINT);
        assert!(matches!(init_of(&f, 1).kind, ExprKind::Binary(..)));
        assert!(matches!(init_of(&f, 2).kind, ExprKind::Binary(..)));
    }

    #[test]
    fn conversions_of_literals() {
        let f = fold_constants(func("unsigned u = -1; char c = 300; long l = 5;"));
        assert_eq!(init_of(&f, 0).as_int(), Some(4294967295));
        assert!(matches!(init_of(&f, 1).kind, ExprKind::Cast { .. }));
        assert_eq!(init_of(&f, 2).as_int(), Some(5));
        assert_eq!(init_of(&f, 2).ty().kind, crate::frontend::TypeKind::Long);
    }

    #[test]
    fn unused_declarations_are_removed() {
        let f = remove_unused(func("int z; int y = 0; return y;"));
        assert_eq!(f.body.len(), 2);
        assert!(f.var_type("z").is_none());
        let f = remove_unused(func("int z = 5; int y; y = z;"));
        assert_eq!(f.body.len(), 3);
        let f = remove_unused(func("int a = 1; int b = a; return 0;"));
        assert!(f.body.len() == 1 && f.variables.is_empty());
        let f = remove_unused(func("int a = 0; int b = 1 / a; return 0;"));
        assert_eq!(f.body.len(), 3);
    }
}
