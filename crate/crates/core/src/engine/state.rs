//! Abstract state: a domain element plus initialization flags.

use std::sync::Arc;

use crate::domains::{DomainElem, DomainError, DomainKind, VarEnv};
use crate::frontend::ast::Expr;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub elem: DomainElem,
    /// Initialized on every path.
    pub definitely: Vec<bool>,
    /// Initialized on some path.
    pub maybe: Vec<bool>,
}

impl State {
    /// ⊤ with every variable uninitialized.
    pub fn entry(kind: DomainKind, env: &Arc<VarEnv>) -> State {
        State {
            elem: DomainElem::top(kind, env),
            definitely: vec![false; env.len()],
            maybe: vec![false; env.len()],
        }
    }

    pub fn bottom(kind: DomainKind, env: &Arc<VarEnv>) -> State {
        State {
            elem: DomainElem::bottom(kind, env),
            definitely: vec![true; env.len()],
            maybe: vec![false; env.len()],
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.elem.is_bottom()
    }

    fn env(&self) -> &Arc<VarEnv> {
        self.elem.env()
    }

    pub fn init(&self, var: &str) -> (bool, bool) {
        match self.env().index(var) {
            Some(i) => (self.definitely[i], self.maybe[i]),
            None => (true, true),
        }
    }

    fn with_elem(&self, elem: DomainElem) -> State {
        State {
            elem,
            definitely: self.definitely.clone(),
            maybe: self.maybe.clone(),
        }
    }

    /// Flags of the two sides merged; a bottom side contributes nothing.
    fn merged_flags(&self, o: &State) -> (Vec<bool>, Vec<bool>) {
        match (self.is_bottom(), o.is_bottom()) {
            (true, _) => (o.definitely.clone(), o.maybe.clone()),
            (_, true) => (self.definitely.clone(), self.maybe.clone()),
            _ => (
                self.definitely.iter().zip(&o.definitely).map(|(a, b)| *a && *b).collect(),
                self.maybe.iter().zip(&o.maybe).map(|(a, b)| *a || *b).collect(),
            ),
        }
    }

    pub fn join(&self, o: &State) -> Result<State, DomainError> {
        let (definitely, maybe) = self.merged_flags(o);
        Ok(State {
            elem: self.elem.join(&o.elem)?,
            definitely,
            maybe,
        })
    }

    pub fn widen(&self, o: &State) -> Result<State, DomainError> {
        let (definitely, maybe) = self.merged_flags(o);
        Ok(State {
            elem: self.elem.widen(&o.elem)?,
            definitely,
            maybe,
        })
    }

    /// Same concretization and same flags.
    pub fn equivalent(&self, o: &State) -> Result<bool, DomainError> {
        Ok(self.elem.equivalent(&o.elem)?
            && (self.is_bottom() || (self.definitely == o.definitely && self.maybe == o.maybe)))
    }

    pub fn assume(&self, cond: &Expr, polarity: bool) -> State {
        self.with_elem(self.elem.assume(cond, polarity))
    }

    pub fn meet_elem(&self, other: &DomainElem) -> Result<State, DomainError> {
        Ok(self.with_elem(self.elem.meet(other)?))
    }

    pub fn replace_elem(&self, elem: DomainElem) -> State {
        self.with_elem(elem)
    }

    pub fn assign(&self, var: &str, rhs: &Expr) -> State {
        let mut s = self.with_elem(self.elem.assign(var, rhs));
        s.set_init(var, true);
        s
    }

    pub fn declare_uninit(&self, var: &str) -> State {
        let mut s = self.with_elem(self.elem.forget(var));
        s.set_init(var, false);
        s
    }

    fn set_init(&mut self, var: &str, v: bool) {
        if let Some(i) = self.env().index(var) {
            self.definitely[i] = v;
            self.maybe[i] = v;
        }
    }
}
