//! Octagon domain over a difference-bound matrix.
//!
//! Variable `k` owns rows/columns `2k` (for `+x_k`) and `2k+1` (for `-x_k`).
//! Entry `m[i][j]` bounds `V_j - V_i`; `None` is `+oo`.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::domains::bound::{fmt_rational, Bound, Itv};
use crate::domains::eval::{self, condition_constraints, linearize, LinCons};
use crate::domains::interval::{refine_le, refine_ne};
use crate::domains::value::Tri;
use crate::domains::{point_matches, AbstractDomain, DomainKind, EvalEvent, VarEnv};
use crate::frontend::ast::Expr;
use crate::Rational;

type Entry = Option<Rational>;

fn le(a: &Entry, b: &Entry) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

fn min_into(slot: &mut Entry, v: Entry) {
    if !le(slot, &v) {
        *slot = v;
    }
}

fn sum(a: &Entry, b: &Entry) -> Entry {
    Some(a.as_ref()? + b.as_ref()?)
}

fn two() -> Rational {
    Rational::from_integer(2.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dbm {
    dim: usize,
    m: Vec<Entry>,
}

impl Dbm {
    pub fn top(vars: usize) -> Dbm {
        let dim = 2 * vars;
        let mut m = vec![None; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Some(Rational::zero());
        }
        Dbm { dim, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Entry {
        &self.m[i * self.dim + j]
    }

    fn slot(&mut self, i: usize, j: usize) -> &mut Entry {
        &mut self.m[i * self.dim + j]
    }

    /// `V_j - V_i <= c` together with its coherent twin.
    pub fn tighten(&mut self, i: usize, j: usize, c: Rational) {
        min_into(self.slot(i, j), Some(c.clone()));
        min_into(self.slot(j ^ 1, i ^ 1), Some(c));
    }

    /// `s x_a <= c`.
    fn add_unary(&mut self, a: usize, pos: bool, c: &Rational) {
        let j = 2 * a + usize::from(!pos);
        self.tighten(j ^ 1, j, c * two());
    }

    /// `s_a x_a + s_b x_b <= c`.
    fn add_binary(&mut self, a: usize, pa: bool, b: usize, pb: bool, c: Rational) {
        let j = 2 * a + usize::from(!pa);
        let i = 2 * b + usize::from(pb);
        self.tighten(i, j, c);
    }

    fn add_box(&mut self, a: usize, itv: &Itv) {
        if let Bound::Finite(h) = &itv.hi {
            self.add_unary(a, true, h);
        }
        if let Bound::Finite(l) = &itv.lo {
            self.add_unary(a, false, &-l);
        }
    }

    fn forget(&mut self, a: usize) {
        for k in 0..self.dim {
            for v in [2 * a, 2 * a + 1] {
                if k != v {
                    *self.slot(v, k) = None;
                    *self.slot(k, v) = None;
                }
            }
        }
    }

    fn project(&self, a: usize, integral: bool) -> Itv {
        let hi = self.get(2 * a + 1, 2 * a).as_ref().map_or(Bound::PosInf, |c| Bound::Finite(c / two()));
        let lo = self.get(2 * a, 2 * a + 1).as_ref().map_or(Bound::NegInf, |c| Bound::Finite(-c / two()));
        let itv = Itv::new(lo, hi).expect("closed and non-empty");
        if integral {
            itv.integral().expect("tight closure keeps an integer inside")
        } else {
            itv
        }
    }

    /// Shortest-path closure, integer tightening of unary bounds, then the
    /// octagonal strengthening step. False when the matrix is empty.
    pub fn close(&mut self, integral: &[bool]) -> bool {
        let d = self.dim;
        for k in 0..d {
            for i in 0..d {
                let ik = self.get(i, k).clone();
                if ik.is_none() {
                    continue;
                }
                for j in 0..d {
                    let via = sum(&ik, self.get(k, j));
                    min_into(self.slot(i, j), via);
                }
            }
        }
        if (0..d).any(|i| self.get(i, i).as_ref().is_some_and(|c| c.is_negative())) {
            return false;
        }
        for (a, _) in integral.iter().enumerate().filter(|(_, b)| **b) {
            for i in [2 * a, 2 * a + 1] {
                if let Some(c) = self.slot(i, i ^ 1) {
                    *c = (&*c / two()).floor() * two();
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let via = sum(self.get(i, i ^ 1), self.get(j ^ 1, j)).map(|c| c / two());
                min_into(self.slot(i, j), via);
            }
        }
        for i in 0..d {
            if self.get(i, i).as_ref().is_some_and(|c| c.is_negative()) {
                return false;
            }
            *self.slot(i, i) = Some(Rational::zero());
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OctagonElem {
    env: Arc<VarEnv>,
    /// `None` is bottom.
    dbm: Option<Dbm>,
    /// Whether `dbm` is strongly closed. Only widening and narrowing leave
    /// it open.
    closed: bool,
}

impl OctagonElem {
    fn integral(&self) -> Vec<bool> {
        (0..self.env.len()).map(|i| self.env.is_integral(i)).collect()
    }

    fn make(env: &Arc<VarEnv>, mut dbm: Dbm) -> Self {
        let integral: Vec<bool> = (0..env.len()).map(|i| env.is_integral(i)).collect();
        let ok = dbm.close(&integral);
        OctagonElem {
            env: env.clone(),
            dbm: ok.then_some(dbm),
            closed: true,
        }
    }

    /// The closed matrix, or `None` on bottom.
    pub fn closed_dbm(&self) -> Option<Dbm> {
        let d = self.dbm.clone()?;
        if self.closed {
            return Some(d);
        }
        Self::make(&self.env, d).dbm
    }

    fn closed(&self) -> Self {
        if self.closed {
            return self.clone();
        }
        OctagonElem {
            env: self.env.clone(),
            dbm: self.closed_dbm(),
            closed: true,
        }
    }

    /// Adds `Σ s_v v <= c` for one or two signed variables.
    pub fn constrain(&self, terms: &[(&str, bool)], c: Rational) -> Self {
        let Some(mut d) = self.closed_dbm() else { return self.clone() };
        let idx = |n: &str| self.env.index(n).unwrap_or_else(|| panic!("unknown variable {n}"));
        match terms {
            [(a, pa)] => d.add_unary(idx(a), *pa, &c),
            [(a, pa), (b, pb)] => d.add_binary(idx(a), *pa, idx(b), *pb, c),
            _ => panic!("octagonal constraints have one or two variables"),
        }
        Self::make(&self.env, d)
    }

    fn boxes(&self, d: &Dbm) -> Vec<Itv> {
        (0..self.env.len()).map(|a| d.project(a, self.env.is_integral(a))).collect()
    }

    fn lookup<'a>(&'a self, boxes: &'a [Itv]) -> impl Fn(&str) -> Itv + 'a {
        move |n| self.env.index(n).map_or_else(Itv::top, |i| boxes[i].clone())
    }

    fn render_closed(&self, d: &Dbm) -> String {
        let sign = |pos: bool| if pos { "" } else { "-" };
        let half = |c: &Rational| fmt_rational(&(c / two()));
        let mut lines = Vec::new();
        let n = self.env.len();
        for a in 0..n {
            let x = self.env.name(a);
            if let Some(c) = d.get(2 * a + 1, 2 * a) {
                lines.push(format!("{x} <= {}", half(c)));
            }
            if let Some(c) = d.get(2 * a, 2 * a + 1) {
                lines.push(format!("-{x} <= {}", half(c)));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for (pa, pb) in [(true, false), (false, true), (true, true), (false, false)] {
                    let j = 2 * a + usize::from(!pa);
                    let i = 2 * b + usize::from(pb);
                    if let Some(c) = d.get(i, j) {
                        let op = if pb { "+" } else { "-" };
                        lines.push(format!(
                            "{}{} {op} {} <= {}",
                            sign(pa),
                            self.env.name(a),
                            self.env.name(b),
                            fmt_rational(c)
                        ));
                    }
                }
            }
        }
        if lines.is_empty() {
            "top".to_string()
        } else {
            lines.join("\n")
        }
    }
}

/// Value of `V_i` at `point`.
fn signed(point: &[Rational], i: usize) -> Rational {
    if i.is_multiple_of(2) {
        point[i / 2].clone()
    } else {
        -point[i / 2].clone()
    }
}

impl AbstractDomain for OctagonElem {
    const KIND: DomainKind = DomainKind::Octagon;

    fn bottom(env: &Arc<VarEnv>) -> Self {
        OctagonElem {
            env: env.clone(),
            dbm: None,
            closed: true,
        }
    }

    fn top(env: &Arc<VarEnv>) -> Self {
        OctagonElem {
            env: env.clone(),
            dbm: Some(Dbm::top(env.len())),
            closed: true,
        }
    }

    fn env(&self) -> &Arc<VarEnv> {
        &self.env
    }

    fn is_bottom(&self) -> bool {
        self.dbm.is_none()
    }

    fn leq(&self, other: &Self) -> bool {
        let Some(a) = self.closed_dbm() else { return true };
        let Some(b) = &other.dbm else { return false };
        a.m.iter().zip(&b.m).all(|(x, y)| le(x, y))
    }

    fn join(&self, other: &Self) -> Self {
        let (Some(a), Some(b)) = (self.closed_dbm(), other.closed_dbm()) else {
            return if self.is_bottom() { other.closed() } else { self.closed() };
        };
        let m = a
            .m
            .into_iter()
            .zip(b.m)
            .map(|(x, y)| if le(&x, &y) { y } else { x })
            .collect();
        OctagonElem {
            env: self.env.clone(),
            dbm: Some(Dbm { dim: a.dim, m }),
            closed: true,
        }
    }

    fn meet(&self, other: &Self) -> Self {
        let (Some(a), Some(b)) = (&self.dbm, &other.dbm) else { return Self::bottom(&self.env) };
        let m = a
            .m
            .iter()
            .zip(&b.m)
            .map(|(x, y)| if le(x, y) { x.clone() } else { y.clone() })
            .collect();
        Self::make(&self.env, Dbm { dim: a.dim, m })
    }

    /// Keeps the entries of `self` that already bound `other`; the result
    /// is deliberately left unclosed.
    fn widen(&self, other: &Self) -> Self {
        let Some(a) = &self.dbm else { return other.clone() };
        let Some(b) = other.closed_dbm() else { return self.clone() };
        let m = a
            .m
            .iter()
            .zip(&b.m)
            .map(|(x, y)| if le(y, x) { x.clone() } else { None })
            .collect();
        OctagonElem {
            env: self.env.clone(),
            dbm: Some(Dbm { dim: a.dim, m }),
            closed: false,
        }
    }

    fn narrow(&self, other: &Self) -> Self {
        let (Some(a), Some(b)) = (&self.dbm, other.closed_dbm()) else { return Self::bottom(&self.env) };
        let m: Vec<Entry> = a
            .m
            .iter()
            .zip(b.m)
            .map(|(x, y)| if x.is_none() { y } else { x.clone() })
            .collect();
        let d = Dbm { dim: a.dim, m };
        if d.clone().close(&self.integral()) {
            OctagonElem {
                env: self.env.clone(),
                dbm: Some(d),
                closed: false,
            }
        } else {
            Self::bottom(&self.env)
        }
    }

    fn assign(&self, var: &str, rhs: &Expr) -> Self {
        let Some(mut d) = self.closed_dbm() else { return Self::bottom(&self.env) };
        let Some(x) = self.env.index(var) else { return self.clone() };
        let boxes = self.boxes(&d);
        let lookup = self.lookup(&boxes);
        let value = eval::eval_quiet(rhs, &lookup).value;
        let form = linearize(rhs, &lookup);
        let single = match form.coeffs.iter().collect::<Vec<_>>()[..] {
            [(v, c)] if c.abs() == Rational::from_integer(1.into()) => self.env.index(v).map(|i| (i, c.is_positive())),
            _ => None,
        };
        match single {
            Some((y, true)) if y == x => {
                // x := x + k shifts every constraint that mentions x.
                let (up, down) = (form.k.hi.clone(), form.k.lo.neg());
                let dim = d.dim;
                for i in 0..dim {
                    for j in 0..dim {
                        if i == j {
                            continue;
                        }
                        let mut delta = Bound::zero();
                        for (hit, by) in [(j == 2 * x, &up), (j == 2 * x + 1, &down), (i == 2 * x, &down), (i == 2 * x + 1, &up)] {
                            if hit {
                                delta = delta.add_hi(by);
                            }
                        }
                        let slot = d.slot(i, j);
                        *slot = match (slot.take(), delta) {
                            (Some(c), Bound::Finite(q)) => Some(c + q),
                            _ => None,
                        };
                    }
                }
            }
            Some((y, pos)) if y != x => {
                // x := ±y + k gives k.lo <= x ∓ y <= k.hi.
                d.forget(x);
                if let Bound::Finite(h) = &form.k.hi {
                    d.add_binary(x, true, y, !pos, h.clone());
                }
                if let Bound::Finite(l) = &form.k.lo {
                    d.add_binary(x, false, y, pos, -l);
                }
            }
            _ => d.forget(x),
        }
        d.add_box(x, &value);
        Self::make(&self.env, d)
    }

    fn assume(&self, cond: &Expr, polarity: bool) -> Self {
        let Some(mut d) = self.closed_dbm() else { return Self::bottom(&self.env) };
        let boxes = self.boxes(&d);
        let lookup = self.lookup(&boxes);
        if eval::condition_truth(cond, &lookup) == if polarity { Tri::No } else { Tri::Yes } {
            return Self::bottom(&self.env);
        }
        for c in condition_constraints(cond, polarity, &lookup) {
            let f = match &c {
                LinCons::Le(f) | LinCons::Ne(f) => f,
            };
            let terms: Option<Vec<(usize, &Rational)>> =
                f.coeffs.iter().map(|(v, q)| self.env.index(v).map(|i| (i, q))).collect();
            let direct = match (&c, &terms, &f.k.lo) {
                (LinCons::Le(_), Some(t), Bound::Finite(klo)) => match t[..] {
                    [] => {
                        if klo.is_positive() {
                            return Self::bottom(&self.env);
                        }
                        true
                    }
                    [(a, q)] => {
                        d.add_unary(a, q.is_positive(), &(-klo / q.abs()));
                        true
                    }
                    [(a, p), (b, q)] if p.abs() == q.abs() => {
                        d.add_binary(a, p.is_positive(), b, q.is_positive(), -klo / p.abs());
                        true
                    }
                    _ => false,
                },
                (LinCons::Le(_), _, Bound::NegInf) => true,
                _ => false,
            };
            if direct {
                continue;
            }
            let mut vals = boxes.clone();
            let ok = match &c {
                LinCons::Le(f) => refine_le(&self.env, &mut vals, f),
                LinCons::Ne(f) => refine_ne(&self.env, &mut vals, f),
            };
            if !ok {
                return Self::bottom(&self.env);
            }
            for (a, v) in vals.iter().enumerate() {
                d.add_box(a, v);
            }
        }
        Self::make(&self.env, d)
    }

    fn forget(&self, var: &str) -> Self {
        let Some(mut d) = self.closed_dbm() else { return Self::bottom(&self.env) };
        if let Some(x) = self.env.index(var) {
            d.forget(x);
        }
        OctagonElem {
            env: self.env.clone(),
            dbm: Some(d),
            closed: true,
        }
    }

    fn project(&self, var: &str) -> Option<Itv> {
        let d = self.closed_dbm()?;
        Some(match self.env.index(var) {
            Some(a) => d.project(a, self.env.is_integral(a)),
            None => Itv::top(),
        })
    }

    fn check(&self, e: &Expr, sink: &mut dyn FnMut(EvalEvent)) {
        if let Some(d) = self.closed_dbm() {
            let boxes = self.boxes(&d);
            eval::eval(e, &self.lookup(&boxes), sink);
        }
    }

    /// Uses the relational information: a condition is definite when one
    /// of the two refinements is empty.
    fn truth(&self, cond: &Expr) -> Tri {
        if self.is_bottom() {
            return Tri::Maybe;
        }
        match (self.assume(cond, true).is_bottom(), self.assume(cond, false).is_bottom()) {
            (true, false) => Tri::No,
            (false, true) => Tri::Yes,
            _ => Tri::Maybe,
        }
    }

    fn render(&self) -> String {
        match self.closed_dbm() {
            None => "bottom".to_string(),
            Some(d) => self.render_closed(&d),
        }
    }

    fn alpha_points(env: &Arc<VarEnv>, points: &[Vec<Rational>]) -> Self {
        if points.is_empty() {
            return Self::bottom(env);
        }
        let mut d = Dbm::top(env.len());
        for i in 0..d.dim {
            for j in 0..d.dim {
                let best = points
                    .iter()
                    .map(|p| {
                        assert!(point_matches(env, p));
                        signed(p, j) - signed(p, i)
                    })
                    .max()
                    .expect("non-empty");
                *d.slot(i, j) = Some(best);
            }
        }
        Self::make(env, d)
    }

    fn contains(&self, point: &[Rational]) -> bool {
        let Some(d) = &self.dbm else { return false };
        if !point_matches(&self.env, point) {
            return false;
        }
        (0..d.dim).all(|i| (0..d.dim).all(|j| le(&Some(signed(point, j) - signed(point, i)), d.get(i, j))))
    }
}
