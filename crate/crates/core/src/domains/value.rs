//! Per-variable value abstractions used by the expression evaluator.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::domains::bound::{Bound, Itv};
use crate::frontend::ast::BinaryOp;
use crate::Rational;

/// Three-valued answer to a yes/no question about every concrete value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    Maybe,
    No,
}

impl Tri {
    pub fn not(self) -> Tri {
        match self {
            Tri::Yes => Tri::No,
            Tri::No => Tri::Yes,
            Tri::Maybe => Tri::Maybe,
        }
    }
}

/// A non-relational abstraction of a set of numbers.
pub trait Value: Clone + PartialEq + fmt::Debug {
    fn top() -> Self;
    fn constant(q: &Rational) -> Self;
    /// Abstraction of the closed range `[lo, hi]`.
    fn range(lo: &Rational, hi: &Rational) -> Self;
    fn join(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self;
    /// Quotient by a divisor that excludes zero; `integral` truncates.
    fn div(&self, o: &Self, integral: bool) -> Self;
    /// Integer remainder by a divisor that excludes zero.
    fn rem(&self, o: &Self) -> Self;
    /// Rounds toward zero.
    fn trunc(&self) -> Self;
    /// Whether the value is zero.
    fn zero(&self) -> Tri;
    /// Whether the value lies within `[lo, hi]`.
    fn within(&self, lo: &Rational, hi: &Rational) -> Tri;
    /// Truth of `a op b` for a relational `op`.
    fn compare(op: BinaryOp, a: &Self, b: &Self) -> Tri;
    /// `1`, `0` or either, for a condition's truth.
    fn truth(t: Tri) -> Self {
        let (zero, one) = (Rational::zero(), Rational::from_integer(1.into()));
        match t {
            Tri::Yes => Self::constant(&one),
            Tri::No => Self::constant(&zero),
            Tri::Maybe => Self::range(&zero, &one),
        }
    }
    /// Value kept after a signed overflow has been flagged: the whole range
    /// of the type, which also covers wrap-around.
    fn after_overflow(&self, lo: &Rational, hi: &Rational) -> Self;
}

impl Value for Itv {
    fn top() -> Self {
        Itv::top()
    }

    fn constant(q: &Rational) -> Self {
        Itv::point(q.clone())
    }

    fn range(lo: &Rational, hi: &Rational) -> Self {
        Itv::new(Bound::Finite(lo.clone()), Bound::Finite(hi.clone())).expect("lo <= hi")
    }

    fn join(&self, o: &Self) -> Self {
        Itv::join(self, o)
    }

    fn neg(&self) -> Self {
        Itv::neg(self)
    }

    fn add(&self, o: &Self) -> Self {
        Itv::add(self, o)
    }

    fn mul(&self, o: &Self) -> Self {
        Itv::mul(self, o)
    }

    fn div(&self, o: &Self, integral: bool) -> Self {
        Itv::div(self, o, integral)
    }

    fn rem(&self, o: &Self) -> Self {
        Itv::rem(self, o)
    }

    fn trunc(&self) -> Self {
        Itv::trunc(self)
    }

    fn zero(&self) -> Tri {
        let z = Rational::zero();
        if self.singleton() == Some(&z) {
            Tri::Yes
        } else if self.contains(&z) {
            Tri::Maybe
        } else {
            Tri::No
        }
    }

    fn within(&self, lo: &Rational, hi: &Rational) -> Tri {
        let r = Itv::range(lo, hi);
        if self.leq(&r) {
            Tri::Yes
        } else if self.meet(&r).is_none() {
            Tri::No
        } else {
            Tri::Maybe
        }
    }

    fn compare(op: BinaryOp, a: &Self, b: &Self) -> Tri {
        let lt = |x: &Itv, y: &Itv| {
            if x.hi < y.lo {
                Tri::Yes
            } else if x.lo >= y.hi {
                Tri::No
            } else {
                Tri::Maybe
            }
        };
        let le = |x: &Itv, y: &Itv| {
            if x.hi <= y.lo {
                Tri::Yes
            } else if x.lo > y.hi {
                Tri::No
            } else {
                Tri::Maybe
            }
        };
        let eq = || match (a.singleton(), b.singleton()) {
            (Some(x), Some(y)) if x == y => Tri::Yes,
            _ if a.meet(b).is_none() => Tri::No,
            _ => Tri::Maybe,
        };
        match op {
            BinaryOp::Lt => lt(a, b),
            BinaryOp::Le => le(a, b),
            BinaryOp::Gt => lt(b, a),
            BinaryOp::Ge => le(b, a),
            BinaryOp::Eq => eq(),
            BinaryOp::Ne => eq().not(),
            _ => Tri::Maybe,
        }
    }

    fn after_overflow(&self, lo: &Rational, hi: &Rational) -> Self {
        Itv::range(lo, hi)
    }
}

/// Subset of {negative, zero, positive}, as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sign(pub u8);

impl Sign {
    pub const NEG: u8 = 1;
    pub const ZERO: u8 = 2;
    pub const POS: u8 = 4;
    pub const BOTTOM: Sign = Sign(0);
    pub const TOP: Sign = Sign(7);

    pub fn of(q: &Rational) -> Sign {
        if q.is_zero() {
            Sign(Sign::ZERO)
        } else if q.is_positive() {
            Sign(Sign::POS)
        } else {
            Sign(Sign::NEG)
        }
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub fn leq(self, o: Sign) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn meet(self, o: Sign) -> Sign {
        Sign(self.0 & o.0)
    }

    pub fn atoms(self) -> impl Iterator<Item = u8> {
        [Sign::NEG, Sign::ZERO, Sign::POS].into_iter().filter(move |a| self.0 & a != 0)
    }

    pub fn contains(self, q: &Rational) -> bool {
        Sign::of(q).leq(self)
    }

    /// Union of `table(a, b)` over all atom pairs.
    fn lift(self, o: Sign, table: impl Fn(u8, u8) -> u8) -> Sign {
        let mut m = 0;
        for a in self.atoms() {
            for b in o.atoms() {
                m |= table(a, b);
            }
        }
        Sign(m)
    }

    /// Sign abstraction of an interval.
    pub fn of_itv(i: &Itv) -> Sign {
        let z = Bound::zero();
        let mut m = 0;
        if i.lo < z {
            m |= Sign::NEG;
        }
        if i.lo <= z && z <= i.hi {
            m |= Sign::ZERO;
        }
        if i.hi > z {
            m |= Sign::POS;
        }
        Sign(m)
    }

    /// Interval hull of the concretization; integral values are at least 1
    /// away from zero when nonzero.
    pub fn to_itv(self, integral: bool) -> Option<Itv> {
        if self.is_bottom() {
            return None;
        }
        let step = if integral { Bound::int(1) } else { Bound::zero() };
        let lo = if self.0 & Sign::NEG != 0 {
            Bound::NegInf
        } else if self.0 & Sign::ZERO != 0 {
            Bound::zero()
        } else {
            step.clone()
        };
        let hi = if self.0 & Sign::POS != 0 {
            Bound::PosInf
        } else if self.0 & Sign::ZERO != 0 {
            Bound::zero()
        } else {
            step.neg()
        };
        Itv::new(lo, hi)
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "bottom",
            1 => "<0",
            2 => "=0",
            3 => "<=0",
            4 => ">0",
            5 => "!=0",
            6 => ">=0",
            _ => "top",
        }
    }
}

impl fmt::Debug for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const N: u8 = Sign::NEG;
const Z: u8 = Sign::ZERO;
const P: u8 = Sign::POS;

fn add_atoms(a: u8, b: u8) -> u8 {
    match (a, b) {
        (Z, x) | (x, Z) => x,
        (x, y) if x == y => x,
        _ => N | Z | P,
    }
}

fn mul_atoms(a: u8, b: u8) -> u8 {
    match (a, b) {
        (Z, _) | (_, Z) => Z,
        (x, y) if x == y => P,
        _ => N,
    }
}

impl Value for Sign {
    fn top() -> Self {
        Sign::TOP
    }

    fn constant(q: &Rational) -> Self {
        Sign::of(q)
    }

    fn range(lo: &Rational, hi: &Rational) -> Self {
        Sign::of_itv(&Itv::range(lo, hi))
    }

    fn join(&self, o: &Self) -> Self {
        Sign(self.0 | o.0)
    }

    fn neg(&self) -> Self {
        let mut m = self.0 & Z;
        if self.0 & N != 0 {
            m |= P;
        }
        if self.0 & P != 0 {
            m |= N;
        }
        Sign(m)
    }

    fn add(&self, o: &Self) -> Self {
        self.lift(*o, add_atoms)
    }

    fn mul(&self, o: &Self) -> Self {
        self.lift(*o, mul_atoms)
    }

    fn div(&self, o: &Self, integral: bool) -> Self {
        self.lift(*o, |a, b| {
            let s = mul_atoms(a, b);
            if integral && s != Z {
                s | Z
            } else {
                s
            }
        })
    }

    fn rem(&self, o: &Self) -> Self {
        self.lift(*o, |a, _| if a == Z { Z } else { a | Z })
    }

    fn trunc(&self) -> Self {
        let mut m = self.0;
        if m & (N | P) != 0 {
            m |= Z;
        }
        Sign(m)
    }

    fn zero(&self) -> Tri {
        if self.0 == Z {
            Tri::Yes
        } else if self.0 & Z != 0 {
            Tri::Maybe
        } else {
            Tri::No
        }
    }

    fn within(&self, lo: &Rational, hi: &Rational) -> Tri {
        let r = Sign::range(lo, hi);
        if self.0 == Z && r.0 & Z != 0 {
            Tri::Yes
        } else if self.meet(r).is_bottom() {
            Tri::No
        } else {
            Tri::Maybe
        }
    }

    fn compare(op: BinaryOp, a: &Self, b: &Self) -> Tri {
        let mut any_true = false;
        let mut any_false = false;
        for x in a.atoms() {
            for y in b.atoms() {
                for ord in orderings(x, y) {
                    if holds(op, ord) {
                        any_true = true;
                    } else {
                        any_false = true;
                    }
                }
            }
        }
        match (any_true, any_false) {
            (true, false) => Tri::Yes,
            (false, true) => Tri::No,
            _ => Tri::Maybe,
        }
    }

    fn after_overflow(&self, lo: &Rational, hi: &Rational) -> Self {
        Sign::range(lo, hi)
    }
}

/// Possible orderings of a value with sign `x` against one with sign `y`.
pub(crate) fn orderings(x: u8, y: u8) -> Vec<std::cmp::Ordering> {
    use std::cmp::Ordering::*;
    let rank = |s: u8| match s {
        N => 0,
        Z => 1,
        _ => 2,
    };
    match rank(x).cmp(&rank(y)) {
        Equal if x == Z => vec![Equal],
        Equal => vec![Less, Equal, Greater],
        o => vec![o],
    }
}

pub(crate) fn holds(op: BinaryOp, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinaryOp::Lt => ord == Less,
        BinaryOp::Le => ord != Greater,
        BinaryOp::Gt => ord == Greater,
        BinaryOp::Ge => ord != Less,
        BinaryOp::Eq => ord == Equal,
        BinaryOp::Ne => ord != Equal,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i128) -> Rational {
        Rational::from_integer(v.into())
    }

    #[test]
    fn sign_tables() {
        let (n, z, p) = (Sign(N), Sign(Z), Sign(P));
        assert_eq!(p.add(&p), p);
        assert_eq!(p.add(&n), Sign::TOP);
        assert_eq!(n.mul(&n), p);
        assert_eq!(z.mul(&Sign::TOP), z);
        assert_eq!(p.div(&p, true), Sign(Z | P));
        assert_eq!(p.div(&p, false), p);
        assert_eq!(n.rem(&p), Sign(N | Z));
        assert_eq!(n.neg(), p);
    }

    #[test]
    fn sign_comparisons() {
        assert_eq!(Sign::compare(BinaryOp::Gt, &Sign(P), &Sign(Z)), Tri::Yes);
        assert_eq!(Sign::compare(BinaryOp::Lt, &Sign(P), &Sign(P)), Tri::Maybe);
        assert_eq!(Sign::compare(BinaryOp::Eq, &Sign(N), &Sign(Z)), Tri::No);
        assert_eq!(Sign::compare(BinaryOp::Eq, &Sign(Z), &Sign(Z)), Tri::Yes);
    }

    #[test]
    fn interval_comparisons() {
        let a = Itv::ints(1, 3);
        assert_eq!(Itv::compare(BinaryOp::Gt, &a, &Itv::ints(0, 0)), Tri::Yes);
        assert_eq!(Itv::compare(BinaryOp::Le, &a, &Itv::ints(0, 0)), Tri::No);
        assert_eq!(Itv::compare(BinaryOp::Ne, &a, &Itv::ints(2, 2)), Tri::Maybe);
        assert_eq!(a.within(&q(0), &q(10)), Tri::Yes);
        assert_eq!(a.within(&q(4), &q(10)), Tri::No);
        assert_eq!(a.zero(), Tri::No);
    }

    #[test]
    fn sign_of_intervals() {
        assert_eq!(Sign::of_itv(&Itv::ints(0, 5)), Sign(Z | P));
        assert_eq!(Sign(P).to_itv(true), Itv::new(Bound::int(1), Bound::PosInf));
        assert_eq!(Sign(N | P).to_itv(false), Some(Itv::top()));
    }
}
