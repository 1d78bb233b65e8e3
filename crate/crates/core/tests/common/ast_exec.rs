//! Structured interpreter over function bodies, before or after normalization.

use std::collections::BTreeMap;

use canalyzer::domains::VarEnv;
use canalyzer::frontend::ast::{Function, Stmt, StmtKind};
use canalyzer::Rational;
use num_traits::Zero;

use super::{int, wrap, Machine, Stop};

const STEP_LIMIT: usize = 20_000;

#[derive(Debug, PartialEq)]
pub enum Outcome {
    Returned {
        value: Option<Rational>,
        store: BTreeMap<String, Rational>,
    },
    Trapped(Stop),
    /// Ran out of steps.
    Diverged,
}

enum Flow {
    Normal,
    Break,
    Return(Option<Rational>),
    Goto(String),
}

enum Halt {
    Trap(Stop),
    Limit,
}

impl From<Stop> for Halt {
    fn from(s: Stop) -> Halt {
        Halt::Trap(s)
    }
}

fn holds_label(s: &Stmt, label: &str) -> bool {
    let mut found = false;
    s.walk(&mut |t| {
        if matches!(&t.kind, StmtKind::Label(l) if l == label) {
            found = true;
        }
    });
    found
}

struct Exec<'a> {
    m: Machine<'a>,
    steps: usize,
    inputs: &'a BTreeMap<String, i64>,
}

impl Exec<'_> {
    fn tick(&mut self) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            Err(Halt::Limit)
        } else {
            Ok(())
        }
    }

    fn truth(&mut self, e: &canalyzer::frontend::ast::Expr) -> Result<bool, Halt> {
        Ok(!self.m.eval(e)?.is_zero())
    }

    /// Runs `stmts`, starting at the statement holding `seek` when given.
    /// Gotos to labels inside the list resume there.
    fn list(&mut self, stmts: &[Stmt], mut seek: Option<String>) -> Result<Flow, Halt> {
        let mut i = match &seek {
            Some(l) => match stmts.iter().position(|s| holds_label(s, l)) {
                Some(i) => i,
                None => return Ok(Flow::Goto(seek.unwrap())),
            },
            None => 0,
        };
        while i < stmts.len() {
            match self.stmt(&stmts[i], seek.take())? {
                Flow::Normal => i += 1,
                Flow::Goto(l) => match stmts.iter().position(|s| holds_label(s, &l)) {
                    Some(j) => {
                        i = j;
                        seek = Some(l);
                    }
                    None => return Ok(Flow::Goto(l)),
                },
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    /// Runs a loop body; `Some(flow)` leaves the loop with that flow.
    fn body(&mut self, body: &[Stmt], seek: Option<String>) -> Result<Option<Flow>, Halt> {
        Ok(match self.list(body, seek)? {
            Flow::Normal => None,
            Flow::Break => Some(Flow::Normal),
            other => Some(other),
        })
    }

    fn stmt(&mut self, s: &Stmt, seek: Option<String>) -> Result<Flow, Halt> {
        self.tick()?;
        let resuming = seek.is_some();
        match &s.kind {
            StmtKind::Decl { name, init, .. } if !resuming => {
                match init {
                    Some(e) => {
                        let v = self.m.eval(e)?;
                        self.m.set(name, v);
                    }
                    None => {
                        let v = self.inputs.get(name).copied().unwrap_or(0);
                        self.m.set(name, int(v as i128));
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) if !resuming => {
                self.m.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::Assert(e) if !resuming => {
                self.m.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::Return(e) if !resuming => Ok(Flow::Return(match e {
                Some(e) => Some(self.m.eval(e)?),
                None => None,
            })),
            StmtKind::Break if !resuming => Ok(Flow::Break),
            StmtKind::Goto(l) if !resuming => Ok(Flow::Goto(l.clone())),
            StmtKind::Block(b) => self.list(b, seek),
            StmtKind::If { cond, then_branch, else_branch } => {
                let take_then = match &seek {
                    Some(l) => then_branch.iter().any(|t| holds_label(t, l)),
                    None => self.truth(cond)?,
                };
                if take_then {
                    self.list(then_branch, seek)
                } else if let Some(e) = else_branch {
                    self.list(e, seek)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => {
                let mut seek = seek;
                loop {
                    if seek.is_none() && !self.truth(cond)? {
                        return Ok(Flow::Normal);
                    }
                    if let Some(f) = self.body(body, seek.take())? {
                        return Ok(f);
                    }
                    self.tick()?;
                }
            }
            StmtKind::DoWhile { body, cond } => {
                let mut seek = seek;
                loop {
                    if let Some(f) = self.body(body, seek.take())? {
                        return Ok(f);
                    }
                    if !self.truth(cond)? {
                        return Ok(Flow::Normal);
                    }
                    self.tick()?;
                }
            }
            StmtKind::For { init, cond, step, body } => {
                let mut seek = seek;
                if seek.is_none() {
                    if let f @ (Flow::Return(_) | Flow::Goto(_) | Flow::Break) = self.list(init, None)? {
                        return Ok(f);
                    }
                }
                loop {
                    if seek.is_none() {
                        if let Some(c) = cond {
                            if !self.truth(c)? {
                                return Ok(Flow::Normal);
                            }
                        }
                    }
                    if let Some(f) = self.body(body, seek.take())? {
                        return Ok(f);
                    }
                    if let Some(e) = step {
                        self.m.eval(e)?;
                    }
                    self.tick()?;
                }
            }
            StmtKind::Switch { scrutinee, body } => {
                let target = match seek {
                    Some(l) => Some(l),
                    None => {
                        let v = self.m.eval(scrutinee)?;
                        let hit = body
                            .iter()
                            .position(|c| matches!(c.kind, StmtKind::Case(k) if int(k) == v))
                            .or_else(|| body.iter().position(|c| matches!(c.kind, StmtKind::Default)));
                        match hit {
                            Some(i) => {
                                return Ok(match self.list(&body[i..], None)? {
                                    Flow::Break => Flow::Normal,
                                    other => other,
                                })
                            }
                            None => return Ok(Flow::Normal),
                        }
                    }
                };
                Ok(match self.list(body, target)? {
                    Flow::Break => Flow::Normal,
                    other => other,
                })
            }
            // Labels, cases, empty statements, and any simple statement
            // skipped while seeking a label.
            _ => Ok(Flow::Normal),
        }
    }
}

/// Runs `f` with uninitialized declarations taking their values from
/// `inputs`. The returned store covers every variable of `f`.
pub fn run(f: &Function, inputs: &BTreeMap<String, i64>) -> Outcome {
    let env = VarEnv::new(f.variables.clone());
    let store = (0..env.len()).map(|i| wrap(int(0), env.ty(i))).collect();
    let mut ex = Exec {
        m: Machine { env: &env, store },
        steps: 0,
        inputs,
    };
    let value = match ex.list(&f.body, None) {
        Ok(Flow::Return(v)) => v,
        Ok(Flow::Goto(l)) => panic!("goto {l} has no target"),
        Ok(_) => None,
        Err(Halt::Trap(s)) => return Outcome::Trapped(s),
        Err(Halt::Limit) => return Outcome::Diverged,
    };
    let store = (0..env.len()).map(|i| (env.name(i).to_string(), ex.m.store[i].clone())).collect();
    Outcome::Returned { value, store }
}
