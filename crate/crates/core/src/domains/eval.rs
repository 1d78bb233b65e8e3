//! Forward evaluation of pure expressions over a non-relational value
//! abstraction, and extraction of linear forms for condition refinement.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::domains::bound::Itv;
use crate::domains::value::{Tri, Value};
use crate::frontend::ast::{BinaryOp, CastKind, Expr, ExprKind, LogicalOp, UnaryOp};
use crate::frontend::types::{CType, SourceLoc};
use crate::frontend::typecheck;
use crate::Rational;

/// Something the checks module may want to report.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalEvent {
    /// A `/` or `%` whose divisor may be zero.
    DivisionByZero { loc: SourceLoc, modulus: bool, definite: bool },
    /// A signed result, or a conversion to a signed type, that may not fit.
    Overflow { loc: SourceLoc, ty: CType, definite: bool },
    ShiftUnsupported { loc: SourceLoc },
}

/// Result of evaluating one node.
#[derive(Clone, Debug, PartialEq)]
pub struct Eval<V> {
    pub value: V,
    /// The node's own operation was applied without clipping, truncation or
    /// wrap-around.
    pub exact: bool,
    /// A sub-expression forced the whole value to top (possible division by
    /// zero, or a shift).
    pub poisoned: bool,
}

impl<V: Value> Eval<V> {
    fn exact(value: V) -> Self {
        Eval {
            value,
            exact: true,
            poisoned: false,
        }
    }

    fn inexact(value: V) -> Self {
        Eval {
            value,
            exact: false,
            poisoned: false,
        }
    }

    fn poison() -> Self {
        Eval {
            value: V::top(),
            exact: false,
            poisoned: true,
        }
    }
}

fn rat(v: i128) -> Rational {
    Rational::from_integer(v.into())
}

fn machine_range(ty: CType) -> Option<(Rational, Rational)> {
    ty.range_i128().map(|(lo, hi)| (rat(lo), rat(hi)))
}

/// Evaluates `e`, reporting check events to `sink`.
pub fn eval<V: Value>(e: &Expr, lookup: &dyn Fn(&str) -> V, sink: &mut dyn FnMut(EvalEvent)) -> Eval<V> {
    Evaluator { lookup, sink }.go(e)
}

/// Evaluates `e` ignoring check events.
pub fn eval_quiet<V: Value>(e: &Expr, lookup: &dyn Fn(&str) -> V) -> Eval<V> {
    eval(e, lookup, &mut |_| {})
}

struct Evaluator<'a, V> {
    lookup: &'a dyn Fn(&str) -> V,
    sink: &'a mut dyn FnMut(EvalEvent),
}

impl<V: Value> Evaluator<'_, V> {
    fn go(&mut self, e: &Expr) -> Eval<V> {
        match &e.kind {
            ExprKind::IntLit(v) => Eval::exact(V::constant(&rat(*v))),
            ExprKind::RealLit(q, _) => Eval::exact(V::constant(q)),
            ExprKind::Var(n) => Eval::exact((self.lookup)(n)),
            ExprKind::Unary(op, a) => {
                let a = self.go(a);
                if a.poisoned {
                    return Eval::poison();
                }
                match op {
                    UnaryOp::Plus => Eval::exact(a.value),
                    UnaryOp::Minus => self.arith(e, a.value.neg()),
                    UnaryOp::Not => Eval::inexact(V::truth(a.value.zero())),
                    _ => Eval::inexact(V::top()),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let (a, b) = (self.go(l), self.go(r));
                if op.is_shift() {
                    (self.sink)(EvalEvent::ShiftUnsupported { loc: e.loc.clone() });
                    return Eval::poison();
                }
                if b.poisoned && matches!(op, BinaryOp::Div | BinaryOp::Rem) {
                    (self.sink)(EvalEvent::DivisionByZero {
                        loc: e.loc.clone(),
                        modulus: *op == BinaryOp::Rem,
                        definite: false,
                    });
                }
                if a.poisoned || b.poisoned {
                    return Eval::poison();
                }
                let integral = e.ty().is_integral();
                match op {
                    _ if op.is_relational() => Eval::inexact(V::truth(V::compare(*op, &a.value, &b.value))),
                    BinaryOp::Add => self.arith(e, a.value.add(&b.value)),
                    BinaryOp::Sub => self.arith(e, a.value.sub(&b.value)),
                    BinaryOp::Mul => self.arith(e, a.value.mul(&b.value)),
                    BinaryOp::Div | BinaryOp::Rem => {
                        let zero = b.value.zero();
                        if zero != Tri::No {
                            (self.sink)(EvalEvent::DivisionByZero {
                                loc: e.loc.clone(),
                                modulus: *op == BinaryOp::Rem,
                                definite: zero == Tri::Yes,
                            });
                            return Eval::poison();
                        }
                        if *op == BinaryOp::Div {
                            let mut r = self.arith(e, a.value.div(&b.value, integral));
                            r.exact &= !integral;
                            r
                        } else {
                            let mut r = self.arith(e, a.value.rem(&b.value));
                            r.exact = false;
                            r
                        }
                    }
                    _ => Eval::inexact(V::top()),
                }
            }
            ExprKind::Logical(op, l, r) => {
                let (a, b) = (self.go(l), self.go(r));
                if a.poisoned || b.poisoned {
                    return Eval::poison();
                }
                let (za, zb) = (a.value.zero(), b.value.zero());
                let t = match op {
                    LogicalOp::And if za == Tri::Yes || zb == Tri::Yes => Tri::No,
                    LogicalOp::And if za == Tri::No && zb == Tri::No => Tri::Yes,
                    LogicalOp::Or if za == Tri::No || zb == Tri::No => Tri::Yes,
                    LogicalOp::Or if za == Tri::Yes && zb == Tri::Yes => Tri::No,
                    _ => Tri::Maybe,
                };
                Eval::inexact(V::truth(t))
            }
            ExprKind::Conditional(c, a, b) => {
                let (c, a, b) = (self.go(c), self.go(a), self.go(b));
                if c.poisoned || a.poisoned || b.poisoned {
                    return Eval::poison();
                }
                match c.value.zero() {
                    Tri::Yes => Eval::inexact(b.value),
                    Tri::No => Eval::inexact(a.value),
                    Tri::Maybe => Eval::inexact(a.value.join(&b.value)),
                }
            }
            ExprKind::Assign(..) | ExprKind::CompoundAssign(..) => Eval::inexact(V::top()),
            ExprKind::Cast { to, kind, operand, .. } => {
                let a = self.go(operand);
                if a.poisoned {
                    return Eval::poison();
                }
                match kind {
                    CastKind::IntegralToFloating | CastKind::FloatingCast => Eval::exact(a.value),
                    CastKind::IntegralCast => {
                        let from = operand.ty();
                        let (Some((flo, fhi)), Some((tlo, thi))) = (machine_range(from), machine_range(*to)) else {
                            return Eval::exact(a.value);
                        };
                        if tlo <= flo && fhi <= thi {
                            return Eval::exact(a.value);
                        }
                        self.fit(&e.loc, *to, a.value, to.signed, false)
                    }
                    CastKind::FloatingToIntegral => {
                        let mut r = self.fit(&e.loc, *to, a.value.trunc(), true, true);
                        r.exact = false;
                        r
                    }
                }
            }
        }
    }

    /// Result of an arithmetic node of type `e.ty`: signed results that may
    /// not fit are reported; unsigned ones wrap.
    fn arith(&mut self, e: &Expr, v: V) -> Eval<V> {
        let ty = e.ty();
        if ty.is_real() {
            return Eval::exact(v);
        }
        self.fit(&e.loc, ty, v, ty.signed, ty.signed)
    }

    /// Checks `v` against `ty`'s range. `report` emits an overflow event;
    /// `trap` means out-of-range executions stop (otherwise they wrap).
    fn fit(&mut self, loc: &SourceLoc, ty: CType, v: V, report: bool, trap: bool) -> Eval<V> {
        let (lo, hi) = machine_range(ty).expect("integral type");
        match v.within(&lo, &hi) {
            Tri::Yes => Eval::exact(v),
            status => {
                if report {
                    (self.sink)(EvalEvent::Overflow {
                        loc: loc.clone(),
                        ty,
                        definite: status == Tri::No,
                    });
                }
                let value = if trap { v.after_overflow(&lo, &hi) } else { V::range(&lo, &hi) };
                Eval::inexact(value)
            }
        }
    }
}

/// Rewrites `x op= e` as the plain right-hand side `x op e` converted to
/// `x`'s type.
pub fn expand_compound(op: BinaryOp, name: &str, ty: CType, rhs: &Expr, loc: &SourceLoc) -> Expr {
    let x = Expr::var(name, ty.unqualified(), loc.clone());
    let bin = typecheck::make_binary(op, x, rhs.clone(), loc.clone()).expect("compound assignment was type-checked");
    typecheck::coerce(bin, ty)
}

/// `Σ coeffs[v] * v + k` where `k` collects non-linear parts as an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct LinForm {
    pub coeffs: BTreeMap<String, Rational>,
    pub k: Itv,
}

impl LinForm {
    pub fn constant(k: Itv) -> Self {
        LinForm {
            coeffs: BTreeMap::new(),
            k,
        }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rational::one());
        LinForm {
            coeffs,
            k: Itv::point(Rational::zero()),
        }
    }

    pub fn add(mut self, o: LinForm) -> Self {
        for (v, c) in o.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                self.coeffs.remove(&v);
            }
        }
        self.k = self.k.add(&o.k);
        self
    }

    pub fn scale(mut self, q: &Rational) -> Self {
        if q.is_zero() {
            return LinForm::constant(Itv::point(Rational::zero()));
        }
        for c in self.coeffs.values_mut() {
            *c *= q;
        }
        self.k = self.k.mul(&Itv::point(q.clone()));
        self
    }

    pub fn neg(self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(self, o: LinForm) -> Self {
        self.add(o.neg())
    }

    pub fn plus_const(mut self, q: Rational) -> Self {
        self.k = self.k.add(&Itv::point(q));
        self
    }

    /// Interval of the form given an interval per variable.
    pub fn range(&self, lookup: &dyn Fn(&str) -> Itv) -> Itv {
        self.coeffs
            .iter()
            .fold(self.k.clone(), |acc, (v, c)| acc.add(&lookup(v).mul(&Itv::point(c.clone()))))
    }
}

/// Linear form of `e`. Sub-expressions that are not linear, or whose own
/// operation may clip, become interval constants.
pub fn linearize(e: &Expr, lookup: &dyn Fn(&str) -> Itv) -> LinForm {
    let ev: Eval<Itv> = eval_quiet(e, lookup);
    let atom = || LinForm::constant(ev.value.clone());
    if !ev.exact || ev.poisoned {
        return atom();
    }
    match &e.kind {
        ExprKind::Var(v) => LinForm::var(v),
        ExprKind::IntLit(_) | ExprKind::RealLit(..) => atom(),
        ExprKind::Unary(UnaryOp::Plus, a) => linearize(a, lookup),
        ExprKind::Unary(UnaryOp::Minus, a) => linearize(a, lookup).neg(),
        ExprKind::Binary(BinaryOp::Add, a, b) => linearize(a, lookup).add(linearize(b, lookup)),
        ExprKind::Binary(BinaryOp::Sub, a, b) => linearize(a, lookup).sub(linearize(b, lookup)),
        ExprKind::Binary(BinaryOp::Mul, a, b) => {
            let (la, lb) = (linearize(a, lookup), linearize(b, lookup));
            match (as_const(&la), as_const(&lb)) {
                (Some(q), _) => lb.scale(&q),
                (_, Some(q)) => la.scale(&q),
                _ => atom(),
            }
        }
        ExprKind::Binary(BinaryOp::Div, a, b) if e.ty().is_real() => {
            let lb = linearize(b, lookup);
            match as_const(&lb) {
                Some(q) if !q.is_zero() => linearize(a, lookup).scale(&(Rational::one() / q)),
                _ => atom(),
            }
        }
        ExprKind::Cast {
            kind: CastKind::IntegralCast | CastKind::IntegralToFloating | CastKind::FloatingCast,
            operand,
            ..
        } => linearize(operand, lookup),
        _ => atom(),
    }
}

fn as_const(l: &LinForm) -> Option<Rational> {
    if l.coeffs.is_empty() {
        l.k.singleton().cloned()
    } else {
        None
    }
}

/// A linear constraint `form <= 0`, `form == 0` or `form != 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum LinCons {
    Le(LinForm),
    Ne(LinForm),
}

/// Splits a condition (or its negation) into linear constraints. Non
/// relational conditions are read as `cond != 0`. `integral` comparisons
/// turn strict inequalities into `<= -1`.
pub fn condition_constraints(cond: &Expr, polarity: bool, lookup: &dyn Fn(&str) -> Itv) -> Vec<LinCons> {
    let (op, l, r) = relational_parts(cond);
    let op = if polarity { op } else { op.negate() };
    let integral = l.ty.is_none_or(|t| t.is_integral()) && r.ty.is_none_or(|t| t.is_integral());
    let form = linearize(&l, lookup).sub(linearize(&r, lookup));
    let one = Rational::one();
    let strict = |f: LinForm| if integral { f.plus_const(one.clone()) } else { f };
    match op {
        BinaryOp::Le => vec![LinCons::Le(form)],
        BinaryOp::Lt => vec![LinCons::Le(strict(form))],
        BinaryOp::Ge => vec![LinCons::Le(form.neg())],
        BinaryOp::Gt => vec![LinCons::Le(strict(form.neg()))],
        BinaryOp::Eq => vec![LinCons::Le(form.clone()), LinCons::Le(form.neg())],
        BinaryOp::Ne => vec![LinCons::Ne(form)],
        _ => vec![],
    }
}

/// `(op, lhs, rhs)` of a relational condition; anything else is `e != 0`.
pub fn relational_parts(cond: &Expr) -> (BinaryOp, Expr, Expr) {
    match &cond.kind {
        ExprKind::Binary(op, l, r) if op.is_relational() => (*op, (**l).clone(), (**r).clone()),
        ExprKind::Unary(UnaryOp::Not, a) => {
            let (op, l, r) = relational_parts(a);
            (op.negate(), l, r)
        }
        _ => {
            let ty = cond.ty.unwrap_or(CType::INT);
            let zero = if ty.is_real() {
                Expr::typed(ExprKind::RealLit(Rational::zero(), "0.0".into()), ty, cond.loc.clone())
            } else {
                Expr::int(0, ty, cond.loc.clone())
            };
            (BinaryOp::Ne, cond.clone(), zero)
        }
    }
}

/// Strips casts that can never change a value: integral widenings and
/// conversions into a floating type.
pub fn peel_exact(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Cast { to, kind, operand, .. } => {
            let keeps = match kind {
                CastKind::IntegralToFloating | CastKind::FloatingCast => true,
                CastKind::IntegralCast => match (operand.ty.and_then(|t| t.range_i128()), to.range_i128()) {
                    (Some((a, b)), Some((c, d))) => c <= a && b <= d,
                    _ => false,
                },
                CastKind::FloatingToIntegral => false,
            };
            if keeps {
                peel_exact(operand)
            } else {
                e
            }
        }
        _ => e,
    }
}

/// Truth of a condition evaluated without refinement.
pub fn condition_truth<V: Value>(cond: &Expr, lookup: &dyn Fn(&str) -> V) -> Tri {
    let (op, l, r) = relational_parts(cond);
    let (a, b) = (eval_quiet(&l, lookup), eval_quiet(&r, lookup));
    V::compare(op, &a.value, &b.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::domains::bound::Bound;
    use crate::frontend::StmtKind;

    /// Right-hand side of the last assignment in `int main() { decls; x = rhs; }`.
    fn rhs(src: &str) -> Expr {
        let f = compile(&format!("int main() {{ {src} }}"), "t.c").unwrap().functions.remove(0);
        match &f.body.last().unwrap().kind {
            StmtKind::Expr(Expr { kind: ExprKind::Assign(_, v), .. }) => (**v).clone(),
            StmtKind::Expr(e) => e.clone(),
            StmtKind::Assert(e) => e.clone(),
            _ => panic!(),
        }
    }

    fn env(vals: &[(&str, Itv)]) -> impl Fn(&str) -> Itv {
        let m: BTreeMap<String, Itv> = vals.iter().map(|(n, i)| (n.to_string(), i.clone())).collect();
        move |n| m.get(n).cloned().unwrap_or_else(Itv::top)
    }

    fn events(e: &Expr, lookup: &dyn Fn(&str) -> Itv) -> (Eval<Itv>, Vec<EvalEvent>) {
        let mut ev = Vec::new();
        let r = eval(e, lookup, &mut |x| ev.push(x));
        (r, ev)
    }

    #[test]
    fn division_by_possible_zero_poisons() {
        let e = rhs("int x, y; x = 1 / y;");
        let (r, ev) = events(&e, &env(&[("y", Itv::ints(-1, 1))]));
        assert!(r.poisoned && r.value.is_top());
        assert!(matches!(ev[..], [EvalEvent::DivisionByZero { definite: false, modulus: false, .. }]));
        let (_, ev) = events(&e, &env(&[("y", Itv::ints(0, 0))]));
        assert!(matches!(ev[..], [EvalEvent::DivisionByZero { definite: true, .. }]));
        let (r, ev) = events(&rhs("int x, y; x = 1 % y;"), &env(&[("y", Itv::ints(1, 5))]));
        assert!(ev.is_empty());
        assert_eq!(r.value, Itv::ints(0, 1));
    }

    #[test]
    fn signed_overflow_gives_type_range() {
        let e = rhs("int x; x = x + 1;");
        let max = (1i128 << 31) - 1;
        let (r, ev) = events(&e, &env(&[("x", Itv::ints(max, max))]));
        assert_eq!(r.value, Itv::ints(-max - 1, max));
        assert!(matches!(ev[..], [EvalEvent::Overflow { definite: true, .. }]));
        let (_, ev) = events(&e, &env(&[]));
        assert!(matches!(ev[..], [EvalEvent::Overflow { definite: false, .. }]));
        let (r, ev) = events(&rhs("char c; c = c + 1;"), &env(&[("c", Itv::ints(0, 100))]));
        assert!(ev.is_empty());
        assert_eq!(r.value, Itv::ints(1, 101));
    }

    #[test]
    fn unsigned_wrap_is_silent() {
        let (r, ev) = events(&rhs("unsigned u; u = u - 1u;"), &env(&[("u", Itv::ints(0, 0))]));
        assert!(ev.is_empty());
        assert_eq!(r.value, Itv::ints(0, 4294967295));
    }

    #[test]
    fn shifts_are_top() {
        let (r, ev) = events(&rhs("int x; x = x << 1;"), &env(&[("x", Itv::ints(1, 1))]));
        assert!(r.value.is_top());
        assert!(matches!(ev[..], [EvalEvent::ShiftUnsupported { .. }]));
    }

    #[test]
    fn casts() {
        let l = env(&[("d", Itv::new(Bound::Finite(Rational::new(7.into(), 2.into())), Bound::int(5)).unwrap())]);
        let (r, _) = events(&rhs("int x; double d; x = d;"), &l);
        assert_eq!(r.value, Itv::ints(3, 5));
        let (r, ev) = events(&rhs("char c; int x; c = x;"), &env(&[("x", Itv::ints(0, 300))]));
        assert_eq!(r.value, Itv::ints(-128, 127));
        assert!(matches!(ev[..], [EvalEvent::Overflow { definite: false, .. }]));
        let (r, ev) = events(&rhs("long l; int x; l = x;"), &env(&[]));
        assert!(r.value.is_top() && ev.is_empty());
    }

    #[test]
    fn linear_forms() {
        let l = env(&[("x", Itv::ints(0, 5)), ("y", Itv::ints(1, 2))]);
        let f = linearize(&rhs("int x, y, z; z = 2 * x - y + 3;"), &l);
        assert_eq!(f.coeffs.get("x"), Some(&rat(2)));
        assert_eq!(f.coeffs.get("y"), Some(&rat(-1)));
        assert_eq!(f.k, Itv::ints(3, 3));
        let f = linearize(&rhs("int x, y, z; z = x * y + x;"), &l);
        assert_eq!(f.coeffs.len(), 1);
        assert_eq!(f.k, Itv::ints(0, 10));
    }

    #[test]
    fn strict_integral_conditions() {
        let l = env(&[]);
        let c = condition_constraints(&rhs("int x; MYASSERT(x < 10);"), true, &l);
        let LinCons::Le(f) = &c[0] else { panic!() };
        assert_eq!(f.k, Itv::ints(-9, -9));
        let c = condition_constraints(&rhs("int x; MYASSERT(x < 10);"), false, &l);
        let LinCons::Le(f) = &c[0] else { panic!() };
        assert_eq!((f.coeffs.get("x"), &f.k), (Some(&rat(-1)), &Itv::ints(10, 10)));
    }
}
