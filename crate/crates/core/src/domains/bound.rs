//! Extended rational bounds and closed intervals over them.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::Rational;

/// A point of the extended rational line.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Bound {
    pub fn int(v: i128) -> Bound {
        Bound::Finite(Rational::from_integer(v.into()))
    }

    pub fn zero() -> Bound {
        Bound::Finite(Rational::zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn neg(&self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Finite(q) => Bound::Finite(-q),
        }
    }

    /// Sum, where the caller guarantees the operands are not opposite
    /// infinities. `-oo + +oo` is resolved towards `toward`.
    fn add_toward(&self, o: &Bound, toward: &Bound) -> Bound {
        match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => toward.clone(),
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            _ => Bound::PosInf,
        }
    }

    /// Sum of two lower bounds.
    pub fn add_lo(&self, o: &Bound) -> Bound {
        self.add_toward(o, &Bound::NegInf)
    }

    /// Sum of two upper bounds.
    pub fn add_hi(&self, o: &Bound) -> Bound {
        self.add_toward(o, &Bound::PosInf)
    }

    /// Product with the convention `0 * oo = 0`.
    pub fn mul(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a * b),
            (Bound::Finite(a), inf) | (inf, Bound::Finite(a)) => match a.cmp(&Rational::zero()) {
                Ordering::Equal => Bound::zero(),
                Ordering::Greater => inf.clone(),
                Ordering::Less => inf.neg(),
            },
            (a, b) if a == b => Bound::PosInf,
            _ => Bound::NegInf,
        }
    }

    /// Quotient for a divisor bound that is not zero. A finite value over an
    /// infinity, and an infinity over an infinity, give 0.
    pub fn div(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a / b),
            (_, Bound::NegInf | Bound::PosInf) => Bound::zero(),
            (inf, Bound::Finite(b)) => {
                if b.is_positive() {
                    inf.clone()
                } else {
                    inf.neg()
                }
            }
        }
    }

    /// Rounds toward zero.
    pub fn trunc(&self) -> Bound {
        match self {
            Bound::Finite(q) => Bound::Finite(q.trunc()),
            b => b.clone(),
        }
    }

    pub fn floor(&self) -> Bound {
        match self {
            Bound::Finite(q) => Bound::Finite(q.floor()),
            b => b.clone(),
        }
    }

    pub fn ceil(&self) -> Bound {
        match self {
            Bound::Finite(q) => Bound::Finite(q.ceil()),
            b => b.clone(),
        }
    }

    pub fn abs(&self) -> Bound {
        match self {
            Bound::Finite(q) => Bound::Finite(q.abs()),
            _ => Bound::PosInf,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Bound::NegInf => 0,
            Bound::Finite(_) => 1,
            Bound::PosInf => 2,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<Rational> for Bound {
    fn from(q: Rational) -> Self {
        Bound::Finite(q)
    }
}

/// Rationals print as integers when integral, otherwise as `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-oo"),
            Bound::PosInf => f.write_str("+oo"),
            Bound::Finite(q) => f.write_str(&fmt_rational(q)),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A non-empty closed interval `[lo, hi]`. Emptiness is expressed as
/// `Option<Itv>` by callers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Itv {
    pub lo: Bound,
    pub hi: Bound,
}

impl Itv {
    /// `None` when `lo > hi` or a bound sits at the wrong infinity.
    pub fn new(lo: Bound, hi: Bound) -> Option<Itv> {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            None
        } else {
            Some(Itv { lo, hi })
        }
    }

    pub fn top() -> Itv {
        Itv {
            lo: Bound::NegInf,
            hi: Bound::PosInf,
        }
    }

    pub fn point(q: Rational) -> Itv {
        Itv {
            lo: Bound::Finite(q.clone()),
            hi: Bound::Finite(q),
        }
    }

    pub fn ints(lo: i128, hi: i128) -> Itv {
        Itv::new(Bound::int(lo), Bound::int(hi)).expect("lo <= hi")
    }

    pub fn is_top(&self) -> bool {
        self.lo == Bound::NegInf && self.hi == Bound::PosInf
    }

    pub fn singleton(&self) -> Option<&Rational> {
        match (&self.lo, &self.hi) {
            (Bound::Finite(a), Bound::Finite(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let b = Bound::Finite(q.clone());
        self.lo <= b && b <= self.hi
    }

    pub fn leq(&self, o: &Itv) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn join(&self, o: &Itv) -> Itv {
        Itv {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    pub fn meet(&self, o: &Itv) -> Option<Itv> {
        Itv::new(self.lo.clone().max(o.lo.clone()), self.hi.clone().min(o.hi.clone()))
    }

    /// Keeps a stable bound, sends an unstable one to infinity.
    pub fn widen(&self, o: &Itv) -> Itv {
        Itv {
            lo: if self.lo <= o.lo { self.lo.clone() } else { Bound::NegInf },
            hi: if o.hi <= self.hi { self.hi.clone() } else { Bound::PosInf },
        }
    }

    /// Refines infinite bounds only.
    pub fn narrow(&self, o: &Itv) -> Itv {
        Itv {
            lo: if self.lo == Bound::NegInf { o.lo.clone() } else { self.lo.clone() },
            hi: if self.hi == Bound::PosInf { o.hi.clone() } else { self.hi.clone() },
        }
    }

    pub fn neg(&self) -> Itv {
        Itv {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn add(&self, o: &Itv) -> Itv {
        Itv {
            lo: self.lo.add_lo(&o.lo),
            hi: self.hi.add_hi(&o.hi),
        }
    }

    pub fn sub(&self, o: &Itv) -> Itv {
        self.add(&o.neg())
    }

    fn hull(cands: [Bound; 4]) -> Itv {
        let lo = cands.iter().min().expect("four").clone();
        let hi = cands.iter().max().expect("four").clone();
        Itv { lo, hi }
    }

    pub fn mul(&self, o: &Itv) -> Itv {
        Itv::hull([
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ])
    }

    /// Quotient for a divisor that excludes zero; `integral` truncates.
    pub fn div(&self, o: &Itv, integral: bool) -> Itv {
        let q = Itv::hull([
            self.lo.div(&o.lo),
            self.lo.div(&o.hi),
            self.hi.div(&o.lo),
            self.hi.div(&o.hi),
        ]);
        if integral {
            q.trunc()
        } else {
            q
        }
    }

    /// C remainder for a divisor that excludes zero: bounded by the
    /// divisor's magnitude and signed like the dividend.
    pub fn rem(&self, o: &Itv) -> Itv {
        let (a, b) = (o.lo.abs(), o.hi.abs());
        let (small, big) = if a <= b { (a, b) } else { (b, a) };
        let one = Bound::int(1);
        let below_small = small.add_hi(&one.neg());
        let zero = Bound::zero();
        if zero <= self.lo && self.hi <= below_small {
            return self.clone();
        }
        if below_small.neg() <= self.lo && self.hi <= zero {
            return self.clone();
        }
        let m = big.add_hi(&one.neg());
        let lo = if self.lo >= zero { zero.clone() } else { self.lo.clone().max(m.neg()) };
        let hi = if self.hi <= zero { zero } else { self.hi.clone().min(m) };
        Itv { lo, hi }
    }

    pub fn trunc(&self) -> Itv {
        Itv {
            lo: self.lo.trunc(),
            hi: self.hi.trunc(),
        }
    }

    /// Integer hull: rounds bounds inward.
    pub fn integral(&self) -> Option<Itv> {
        Itv::new(self.lo.ceil(), self.hi.floor())
    }
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn itv(lo: i128, hi: i128) -> Itv {
        Itv::ints(lo, hi)
    }

    fn hi_inf(lo: i128) -> Itv {
        Itv::new(Bound::int(lo), Bound::PosInf).unwrap()
    }

    #[test]
    fn bound_order() {
        assert!(Bound::NegInf < Bound::int(-1000));
        assert!(Bound::int(3) < Bound::PosInf);
        assert!(Bound::int(2) < Bound::int(3));
    }

    #[test]
    fn multiplication_corners() {
        assert_eq!(itv(-2, 3).mul(&itv(4, 5)), itv(-10, 15));
        assert_eq!(itv(0, 0).mul(&Itv::top()), itv(0, 0));
        assert_eq!(hi_inf(1).mul(&itv(-1, -1)), Itv::new(Bound::NegInf, Bound::int(-1)).unwrap());
    }

    #[test]
    fn truncated_division() {
        assert_eq!(itv(7, 7).div(&itv(2, 2), true), itv(3, 3));
        assert_eq!(itv(-7, -7).div(&itv(2, 2), true), itv(-3, -3));
        assert_eq!(itv(-7, 7).div(&itv(-2, -1), true), itv(-7, 7));
        assert_eq!(hi_inf(5).div(&hi_inf(1), true), hi_inf(0));
    }

    #[test]
    fn remainder() {
        assert_eq!(itv(0, 3).rem(&itv(5, 9)), itv(0, 3));
        assert_eq!(itv(0, 100).rem(&itv(5, 9)), itv(0, 8));
        assert_eq!(itv(-100, 100).rem(&itv(-3, -3)), itv(-2, 2));
        assert_eq!(itv(-1, 100).rem(&hi_inf(1)), itv(-1, 100));
    }

    #[test]
    fn display() {
        assert_eq!(Itv::top().to_string(), "[-oo,+oo]");
        assert_eq!(itv(10, 10).to_string(), "[10,10]");
        let q = Rational::new(1.into(), 2.into());
        assert_eq!(Itv::point(q).to_string(), "[1/2,1/2]");
    }
}
