//! Non-relational interval domain: one `[lo, hi]` per variable.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::domains::bound::{Bound, Itv};
use crate::domains::eval::{self, condition_constraints, LinCons, LinForm};
use crate::domains::value::Tri;
use crate::domains::{point_matches, AbstractDomain, DomainKind, EvalEvent, VarEnv};
use crate::frontend::ast::Expr;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalElem {
    env: Arc<VarEnv>,
    /// `None` is bottom.
    vals: Option<Vec<Itv>>,
}

impl IntervalElem {
    pub fn from_intervals(env: &Arc<VarEnv>, vals: Vec<Itv>) -> Self {
        assert_eq!(vals.len(), env.len());
        IntervalElem {
            env: env.clone(),
            vals: Some(vals),
        }
    }

    pub fn intervals(&self) -> Option<&[Itv]> {
        self.vals.as_deref()
    }

    fn lookup<'a>(&'a self, vals: &'a [Itv]) -> impl Fn(&str) -> Itv + 'a {
        move |n| self.env.index(n).map_or_else(Itv::top, |i| vals[i].clone())
    }

    fn pointwise(&self, other: &Self, f: impl Fn(&Itv, &Itv) -> Itv) -> Self {
        let vals = match (&self.vals, &other.vals) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| f(x, y)).collect()),
            _ => None,
        };
        IntervalElem {
            env: self.env.clone(),
            vals,
        }
    }
}

/// Applies `form <= 0` to the box `vals`; false when it has no solution.
pub(crate) fn refine_le(env: &VarEnv, vals: &mut [Itv], form: &LinForm) -> bool {
    let terms: Vec<(Option<usize>, &Rational)> = form.coeffs.iter().map(|(v, c)| (env.index(v), c)).collect();
    let term_lo = |vals: &[Itv], (i, c): &(Option<usize>, &Rational)| -> Bound {
        match i {
            Some(i) => vals[*i].mul(&Itv::point((*c).clone())).lo,
            None => Bound::NegInf,
        }
    };
    let total = terms.iter().fold(form.k.lo.clone(), |acc, t| acc.add_lo(&term_lo(vals, t)));
    if total > Bound::zero() {
        return false;
    }
    for (n, t) in terms.iter().enumerate() {
        let Some(i) = t.0 else { continue };
        let rest = terms
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != n)
            .fold(form.k.lo.clone(), |acc, (_, u)| acc.add_lo(&term_lo(vals, u)));
        let Bound::Finite(rest) = rest else { continue };
        let limit = -rest / t.1;
        let bound = if t.1 > &Rational::zero() {
            Itv::new(Bound::NegInf, Bound::Finite(limit))
        } else {
            Itv::new(Bound::Finite(limit), Bound::PosInf)
        }
        .expect("half line");
        let mut r = match vals[i].meet(&bound) {
            Some(r) => r,
            None => return false,
        };
        if env.is_integral(i) {
            match r.integral() {
                Some(x) => r = x,
                None => return false,
            }
        }
        vals[i] = r;
    }
    true
}

/// Applies `form != 0` where it can shrink a single integral bound.
pub(crate) fn refine_ne(env: &VarEnv, vals: &mut [Itv], form: &LinForm) -> bool {
    let Some(k) = form.k.singleton() else { return true };
    if form.coeffs.is_empty() {
        return !k.is_zero();
    }
    if form.coeffs.len() != 1 {
        return true;
    }
    let (v, c) = form.coeffs.iter().next().expect("one term");
    let Some(i) = env.index(v) else { return true };
    let excluded = -k / c;
    let x = &vals[i];
    if x.singleton() == Some(&excluded) {
        return false;
    }
    if env.is_integral(i) && excluded.is_integer() {
        let e = Bound::Finite(excluded.clone());
        let one = Rational::one();
        let lo = if x.lo == e { Bound::Finite(&excluded + &one) } else { x.lo.clone() };
        let hi = if x.hi == e { Bound::Finite(&excluded - &one) } else { x.hi.clone() };
        match Itv::new(lo, hi) {
            Some(r) => vals[i] = r,
            None => return false,
        }
    }
    true
}

impl AbstractDomain for IntervalElem {
    const KIND: DomainKind = DomainKind::Interval;

    fn bottom(env: &Arc<VarEnv>) -> Self {
        IntervalElem {
            env: env.clone(),
            vals: None,
        }
    }

    fn top(env: &Arc<VarEnv>) -> Self {
        IntervalElem {
            env: env.clone(),
            vals: Some(vec![Itv::top(); env.len()]),
        }
    }

    fn env(&self) -> &Arc<VarEnv> {
        &self.env
    }

    fn is_bottom(&self) -> bool {
        self.vals.is_none()
    }

    fn leq(&self, other: &Self) -> bool {
        match (&self.vals, &other.vals) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(y)),
        }
    }

    fn join(&self, other: &Self) -> Self {
        match (&self.vals, &other.vals) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            _ => self.pointwise(other, Itv::join),
        }
    }

    fn meet(&self, other: &Self) -> Self {
        let vals = match (&self.vals, &other.vals) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| x.meet(y)).collect::<Option<Vec<_>>>(),
            _ => None,
        };
        IntervalElem {
            env: self.env.clone(),
            vals,
        }
    }

    fn widen(&self, other: &Self) -> Self {
        match (&self.vals, &other.vals) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            _ => self.pointwise(other, Itv::widen),
        }
    }

    fn narrow(&self, other: &Self) -> Self {
        self.pointwise(other, Itv::narrow)
    }

    fn assign(&self, var: &str, rhs: &Expr) -> Self {
        let Some(vals) = &self.vals else { return self.clone() };
        let Some(i) = self.env.index(var) else { return self.clone() };
        let v = eval::eval_quiet(rhs, &self.lookup(vals)).value;
        let mut vals = vals.clone();
        vals[i] = v;
        IntervalElem {
            env: self.env.clone(),
            vals: Some(vals),
        }
    }

    fn assume(&self, cond: &Expr, polarity: bool) -> Self {
        let Some(vals) = &self.vals else { return self.clone() };
        let truth = self.truth(cond);
        if truth == if polarity { Tri::No } else { Tri::Yes } {
            return Self::bottom(&self.env);
        }
        let mut vals = vals.clone();
        for _ in 0..2 {
            let cons = condition_constraints(cond, polarity, &self.lookup(&vals));
            for c in &cons {
                let ok = match c {
                    LinCons::Le(f) => refine_le(&self.env, &mut vals, f),
                    LinCons::Ne(f) => refine_ne(&self.env, &mut vals, f),
                };
                if !ok {
                    return Self::bottom(&self.env);
                }
            }
        }
        IntervalElem {
            env: self.env.clone(),
            vals: Some(vals),
        }
    }

    fn forget(&self, var: &str) -> Self {
        let mut r = self.clone();
        if let (Some(vals), Some(i)) = (&mut r.vals, self.env.index(var)) {
            vals[i] = Itv::top();
        }
        r
    }

    fn project(&self, var: &str) -> Option<Itv> {
        let vals = self.vals.as_ref()?;
        Some(self.env.index(var).map_or_else(Itv::top, |i| vals[i].clone()))
    }

    fn check(&self, e: &Expr, sink: &mut dyn FnMut(EvalEvent)) {
        if let Some(vals) = &self.vals {
            eval::eval(e, &self.lookup(vals), sink);
        }
    }

    fn truth(&self, cond: &Expr) -> Tri {
        match &self.vals {
            Some(vals) => eval::condition_truth(cond, &self.lookup(vals)),
            None => Tri::Maybe,
        }
    }

    fn render(&self) -> String {
        match &self.vals {
            None => "bottom".to_string(),
            Some(vals) => vals
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{} in {}", self.env.name(i), v))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    fn alpha_points(env: &Arc<VarEnv>, points: &[Vec<Rational>]) -> Self {
        let mut r = Self::bottom(env);
        for p in points {
            assert!(point_matches(env, p));
            let pt = IntervalElem::from_intervals(env, p.iter().map(|q| Itv::point(q.clone())).collect());
            r = r.join(&pt);
        }
        r
    }

    fn contains(&self, point: &[Rational]) -> bool {
        match &self.vals {
            None => false,
            Some(vals) => point_matches(&self.env, point) && vals.iter().zip(point).all(|(v, q)| v.contains(q)),
        }
    }
}
