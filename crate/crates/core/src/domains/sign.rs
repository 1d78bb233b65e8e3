//! Sign domain: per variable, a subset of {negative, zero, positive}.

use std::sync::Arc;

use crate::domains::bound::Itv;
use crate::domains::eval::{self, peel_exact, relational_parts};
use crate::domains::value::{holds, orderings, Sign, Tri, Value};
use crate::domains::{point_matches, AbstractDomain, DomainKind, EvalEvent, VarEnv};
use crate::frontend::ast::Expr;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct SignElem {
    env: Arc<VarEnv>,
    /// `None` is bottom; no entry is ever the empty sign.
    vals: Option<Vec<Sign>>,
}

impl SignElem {
    pub fn from_signs(env: &Arc<VarEnv>, vals: Vec<Sign>) -> Self {
        assert_eq!(vals.len(), env.len());
        let vals = if vals.iter().any(|s| s.is_bottom()) { None } else { Some(vals) };
        SignElem { env: env.clone(), vals }
    }

    pub fn signs(&self) -> Option<&[Sign]> {
        self.vals.as_deref()
    }

    fn lookup<'a>(&'a self, vals: &'a [Sign]) -> impl Fn(&str) -> Sign + 'a {
        move |n| self.env.index(n).map_or(Sign::TOP, |i| vals[i])
    }

    fn pointwise(&self, other: &Self, f: impl Fn(Sign, Sign) -> Sign) -> Self {
        match (&self.vals, &other.vals) {
            (Some(a), Some(b)) => SignElem::from_signs(&self.env, a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()),
            _ => Self::bottom(&self.env),
        }
    }
}

/// Atoms of `x` that can stand in relation `op` to some atom of `y`.
fn restrict(x: Sign, op: crate::frontend::ast::BinaryOp, y: Sign) -> Sign {
    let mut m = 0;
    for a in x.atoms() {
        if y.atoms().any(|b| orderings(a, b).into_iter().any(|o| holds(op, o))) {
            m |= a;
        }
    }
    Sign(m)
}

impl AbstractDomain for SignElem {
    const KIND: DomainKind = DomainKind::Sign;

    fn bottom(env: &Arc<VarEnv>) -> Self {
        SignElem { env: env.clone(), vals: None }
    }

    fn top(env: &Arc<VarEnv>) -> Self {
        SignElem {
            env: env.clone(),
            vals: Some(vec![Sign::TOP; env.len()]),
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
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(*y)),
        }
    }

    fn join(&self, other: &Self) -> Self {
        match (&self.vals, &other.vals) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            _ => self.pointwise(other, |a, b| a.join(&b)),
        }
    }

    fn meet(&self, other: &Self) -> Self {
        self.pointwise(other, Sign::meet)
    }

    /// The lattice is finite, so widening is the join.
    fn widen(&self, other: &Self) -> Self {
        self.join(other)
    }

    fn narrow(&self, other: &Self) -> Self {
        self.pointwise(other, |a, b| if a == Sign::TOP { b } else { a })
    }

    fn assign(&self, var: &str, rhs: &Expr) -> Self {
        let Some(vals) = &self.vals else { return self.clone() };
        let Some(i) = self.env.index(var) else { return self.clone() };
        let v = eval::eval_quiet(rhs, &self.lookup(vals)).value;
        let mut vals = vals.clone();
        vals[i] = v;
        SignElem::from_signs(&self.env, vals)
    }

    fn assume(&self, cond: &Expr, polarity: bool) -> Self {
        let Some(vals) = &self.vals else { return self.clone() };
        let (op, l, r) = relational_parts(cond);
        let op = if polarity { op } else { op.negate() };
        let lookup = self.lookup(vals);
        let (a, b) = (eval::eval_quiet(&l, &lookup).value, eval::eval_quiet(&r, &lookup).value);
        if Sign::compare(op, &a, &b) == Tri::No {
            return Self::bottom(&self.env);
        }
        let mut out = vals.clone();
        if let Some(i) = peel_exact(&l).as_var().and_then(|v| self.env.index(v)) {
            out[i] = restrict(out[i], op, b);
        }
        if let Some(i) = peel_exact(&r).as_var().and_then(|v| self.env.index(v)) {
            out[i] = restrict(out[i], op.mirror(), a);
        }
        SignElem::from_signs(&self.env, out)
    }

    fn forget(&self, var: &str) -> Self {
        let mut r = self.clone();
        if let (Some(vals), Some(i)) = (&mut r.vals, self.env.index(var)) {
            vals[i] = Sign::TOP;
        }
        r
    }

    fn project(&self, var: &str) -> Option<Itv> {
        let vals = self.vals.as_ref()?;
        match self.env.index(var) {
            Some(i) => vals[i].to_itv(self.env.is_integral(i)),
            None => Some(Itv::top()),
        }
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
                .map(|(i, s)| format!("{}: {}", self.env.name(i), s))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    fn alpha_points(env: &Arc<VarEnv>, points: &[Vec<Rational>]) -> Self {
        let mut r = Self::bottom(env);
        for p in points {
            assert!(point_matches(env, p));
            r = r.join(&SignElem::from_signs(env, p.iter().map(Sign::of).collect()));
        }
        r
    }

    fn contains(&self, point: &[Rational]) -> bool {
        match &self.vals {
            None => false,
            Some(vals) => point_matches(&self.env, point) && vals.iter().zip(point).all(|(s, q)| s.contains(q)),
        }
    }
}
