//! Abstract domains: the common interface and the interval, octagon and
//! sign implementations.

pub mod bound;
pub mod eval;
pub mod interval;
pub mod octagon;
pub mod sign;
pub mod value;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ast::Expr;
use crate::frontend::types::CType;
use crate::Rational;

pub use bound::{Bound, Itv};
pub use eval::EvalEvent;
pub use interval::IntervalElem;
pub use octagon::OctagonElem;
pub use sign::SignElem;
pub use value::{Sign, Tri};

/// The variables of one function, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarEnv {
    vars: Vec<(String, CType)>,
    index: HashMap<String, usize>,
}

impl VarEnv {
    /// Panics on duplicate names.
    pub fn new(vars: Vec<(String, CType)>) -> Arc<VarEnv> {
        let mut index = HashMap::new();
        for (i, (n, _)) in vars.iter().enumerate() {
            let prev = index.insert(n.clone(), i);
            assert!(prev.is_none(), "duplicate variable {n}");
        }
        Arc::new(VarEnv { vars, index })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vars[i].0
    }

    pub fn ty(&self, i: usize) -> CType {
        self.vars[i].1
    }

    pub fn is_integral(&self, i: usize) -> bool {
        self.vars[i].1.is_integral()
    }

    pub fn vars(&self) -> &[(String, CType)] {
        &self.vars
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Octagon,
    Sign,
}

impl DomainKind {
    pub const ALL: [DomainKind; 3] = [DomainKind::Interval, DomainKind::Octagon, DomainKind::Sign];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Octagon => "octagon",
            DomainKind::Sign => "sign",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown domain `{s}` (expected interval, octagon or sign)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(DomainKind, DomainKind),
    #[error("operands are over different variable environments")]
    EnvMismatch,
    #[error("narrowing argument is not below the first operand")]
    NotDescending,
}

/// Operations every abstract domain provides. Elements are immutable
/// values over a fixed [`VarEnv`].
pub trait AbstractDomain: Clone + fmt::Debug + PartialEq + Send + Sync {
    const KIND: DomainKind;

    fn bottom(env: &Arc<VarEnv>) -> Self;
    fn top(env: &Arc<VarEnv>) -> Self;
    fn env(&self) -> &Arc<VarEnv>;
    fn is_bottom(&self) -> bool;
    fn leq(&self, other: &Self) -> bool;
    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
    /// `self` is the previous iterate, `other` the next one.
    fn widen(&self, other: &Self) -> Self;
    fn narrow(&self, other: &Self) -> Self;
    /// `var := rhs` for a pure, typed `rhs`.
    fn assign(&self, var: &str, rhs: &Expr) -> Self;
    /// Restricts to the stores where `cond` evaluates to `polarity`.
    fn assume(&self, cond: &Expr, polarity: bool) -> Self;
    fn forget(&self, var: &str) -> Self;
    /// Tightest interval for `var`; `None` on bottom.
    fn project(&self, var: &str) -> Option<Itv>;
    /// Evaluates `e` only to report check events.
    fn check(&self, e: &Expr, sink: &mut dyn FnMut(EvalEvent));
    /// Truth of `cond` without refinement.
    fn truth(&self, cond: &Expr) -> Tri;
    fn render(&self) -> String;
    /// Best abstraction of a finite set of points (one value per variable).
    fn alpha_points(env: &Arc<VarEnv>, points: &[Vec<Rational>]) -> Self;
    fn contains(&self, point: &[Rational]) -> bool;

    fn equivalent(&self, other: &Self) -> bool {
        self.leq(other) && other.leq(self)
    }
}

/// An element of any of the three domains.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainElem {
    Interval(IntervalElem),
    Octagon(OctagonElem),
    Sign(SignElem),
}

macro_rules! each {
    ($self:expr, $x:ident => $body:expr) => {
        match $self {
            DomainElem::Interval($x) => $body,
            DomainElem::Octagon($x) => $body,
            DomainElem::Sign($x) => $body,
        }
    };
}

macro_rules! each_wrap {
    ($self:expr, $x:ident => $body:expr) => {
        match $self {
            DomainElem::Interval($x) => DomainElem::Interval($body),
            DomainElem::Octagon($x) => DomainElem::Octagon($body),
            DomainElem::Sign($x) => DomainElem::Sign($body),
        }
    };
}

macro_rules! binary {
    ($a:expr, $b:expr, $x:ident, $y:ident => $body:expr) => {{
        $a.compatible($b)?;
        Ok(match ($a, $b) {
            (DomainElem::Interval($x), DomainElem::Interval($y)) => DomainElem::Interval($body),
            (DomainElem::Octagon($x), DomainElem::Octagon($y)) => DomainElem::Octagon($body),
            (DomainElem::Sign($x), DomainElem::Sign($y)) => DomainElem::Sign($body),
            _ => unreachable!("checked by compatible"),
        })
    }};
}

impl DomainElem {
    pub fn bottom(kind: DomainKind, env: &Arc<VarEnv>) -> DomainElem {
        match kind {
            DomainKind::Interval => DomainElem::Interval(IntervalElem::bottom(env)),
            DomainKind::Octagon => DomainElem::Octagon(OctagonElem::bottom(env)),
            DomainKind::Sign => DomainElem::Sign(SignElem::bottom(env)),
        }
    }

    pub fn top(kind: DomainKind, env: &Arc<VarEnv>) -> DomainElem {
        match kind {
            DomainKind::Interval => DomainElem::Interval(IntervalElem::top(env)),
            DomainKind::Octagon => DomainElem::Octagon(OctagonElem::top(env)),
            DomainKind::Sign => DomainElem::Sign(SignElem::top(env)),
        }
    }

    pub fn alpha_points(kind: DomainKind, env: &Arc<VarEnv>, points: &[Vec<Rational>]) -> DomainElem {
        match kind {
            DomainKind::Interval => DomainElem::Interval(IntervalElem::alpha_points(env, points)),
            DomainKind::Octagon => DomainElem::Octagon(OctagonElem::alpha_points(env, points)),
            DomainKind::Sign => DomainElem::Sign(SignElem::alpha_points(env, points)),
        }
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            DomainElem::Interval(_) => DomainKind::Interval,
            DomainElem::Octagon(_) => DomainKind::Octagon,
            DomainElem::Sign(_) => DomainKind::Sign,
        }
    }

    pub fn env(&self) -> &Arc<VarEnv> {
        each!(self, x => x.env())
    }

    /// Same domain and same environment.
    pub fn compatible(&self, other: &DomainElem) -> Result<(), DomainError> {
        if self.kind() != other.kind() {
            return Err(DomainError::DomainMismatch(self.kind(), other.kind()));
        }
        let (a, b) = (self.env(), other.env());
        if !Arc::ptr_eq(a, b) && a != b {
            return Err(DomainError::EnvMismatch);
        }
        Ok(())
    }

    pub fn is_bottom(&self) -> bool {
        each!(self, x => x.is_bottom())
    }

    pub fn leq(&self, other: &DomainElem) -> Result<bool, DomainError> {
        self.compatible(other)?;
        Ok(match (self, other) {
            (DomainElem::Interval(a), DomainElem::Interval(b)) => a.leq(b),
            (DomainElem::Octagon(a), DomainElem::Octagon(b)) => a.leq(b),
            (DomainElem::Sign(a), DomainElem::Sign(b)) => a.leq(b),
            _ => unreachable!("checked by compatible"),
        })
    }

    /// Mutual inclusion.
    pub fn equivalent(&self, other: &DomainElem) -> Result<bool, DomainError> {
        Ok(self.leq(other)? && other.leq(self)?)
    }

    pub fn join(&self, other: &DomainElem) -> Result<DomainElem, DomainError> {
        binary!(self, other, a, b => a.join(b))
    }

    pub fn meet(&self, other: &DomainElem) -> Result<DomainElem, DomainError> {
        binary!(self, other, a, b => a.meet(b))
    }

    pub fn widen(&self, other: &DomainElem) -> Result<DomainElem, DomainError> {
        binary!(self, other, a, b => a.widen(b))
    }

    /// Narrowing; `NotDescending` when `other` is not below `self`.
    pub fn narrow(&self, other: &DomainElem) -> Result<DomainElem, DomainError> {
        if !other.leq(self)? {
            return Err(DomainError::NotDescending);
        }
        binary!(self, other, a, b => a.narrow(b))
    }

    /// Narrowing without the descending precondition check.
    pub fn narrow_unchecked(&self, other: &DomainElem) -> Result<DomainElem, DomainError> {
        binary!(self, other, a, b => a.narrow(b))
    }

    pub fn assign(&self, var: &str, rhs: &Expr) -> DomainElem {
        each_wrap!(self, x => x.assign(var, rhs))
    }

    pub fn assume(&self, cond: &Expr, polarity: bool) -> DomainElem {
        each_wrap!(self, x => x.assume(cond, polarity))
    }

    pub fn forget(&self, var: &str) -> DomainElem {
        each_wrap!(self, x => x.forget(var))
    }

    pub fn project(&self, var: &str) -> Option<Itv> {
        each!(self, x => x.project(var))
    }

    pub fn check(&self, e: &Expr, sink: &mut dyn FnMut(EvalEvent)) {
        each!(self, x => x.check(e, sink))
    }

    pub fn truth(&self, cond: &Expr) -> Tri {
        each!(self, x => x.truth(cond))
    }

    pub fn render(&self) -> String {
        each!(self, x => x.render())
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        each!(self, x => x.contains(point))
    }

    /// Interval projection of every variable, in environment order.
    pub fn projections(&self) -> Option<Vec<(String, Itv)>> {
        if self.is_bottom() {
            return None;
        }
        let env = self.env();
        Some(
            (0..env.len())
                .map(|i| {
                    let n = env.name(i);
                    (n.to_string(), self.project(n).expect("not bottom"))
                })
                .collect(),
        )
    }
}

impl fmt::Display for DomainElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Checks that every point has one value per variable.
pub(crate) fn point_matches(env: &VarEnv, point: &[Rational]) -> bool {
    point.len() == env.len()
}
