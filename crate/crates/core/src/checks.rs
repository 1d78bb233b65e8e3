//! Implicit checks (division, overflow, uninitialized reads, shifts) and
//! explicit `MYASSERT` verdicts, evaluated against final block states.

use std::fmt;

use serde::Serialize;

use crate::domains::{DomainElem, EvalEvent};
use crate::frontend::ast::{Expr, ExprKind};
use crate::frontend::pretty;
use crate::frontend::types::SourceLoc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagKind {
    DivByZero,
    ModByZero,
    Overflow,
    UninitializedUse,
    ShiftUnsupported,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Definite,
    Possible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub severity: Severity,
    pub loc: SourceLoc,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Definite => "error",
            Severity::Possible => "warning",
        };
        write!(f, "{}: {sev}: {}", self.loc, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictResult {
    Proven,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub assertion_loc: SourceLoc,
    pub condition: String,
    pub result: VerdictResult,
    pub state_at: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.result {
            VerdictResult::Proven => "proven",
            VerdictResult::Violated => "violated",
            VerdictResult::Unknown => "unknown",
        };
        write!(f, "{}: MYASSERT({}) {r}", self.assertion_loc, self.condition)?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

pub fn diagnostic_from_event(ev: EvalEvent) -> Diagnostic {
    let sev = |definite: bool| if definite { Severity::Definite } else { Severity::Possible };
    match ev {
        EvalEvent::DivisionByZero { loc, modulus, definite } => {
            let (kind, what) = if modulus {
                (DiagKind::ModByZero, "modulus")
            } else {
                (DiagKind::DivByZero, "division")
            };
            let how = if definite { "is" } else { "may be" };
            Diagnostic {
                kind,
                severity: sev(definite),
                loc,
                message: format!("{what} by zero: divisor {how} zero"),
                variable: None,
            }
        }
        EvalEvent::Overflow { loc, ty, definite } => Diagnostic {
            kind: DiagKind::Overflow,
            severity: sev(definite),
            message: format!(
                "{} overflow: value {} outside the range of {ty}",
                if definite { "integer" } else { "possible integer" },
                if definite { "is always" } else { "may be" }
            ),
            loc,
            variable: None,
        },
        EvalEvent::ShiftUnsupported { loc } => Diagnostic {
            kind: DiagKind::ShiftUnsupported,
            severity: Severity::Possible,
            loc,
            message: "shift operators are not modeled; result is unknown".into(),
            variable: None,
        },
    }
}

/// Reports the events of evaluating `e` in `state` plus reads of variables
/// that are not initialized on every path. `init` answers
/// `(definitely, maybe)` for a variable.
pub fn check_expr(
    state: &DomainElem,
    init: &dyn Fn(&str) -> (bool, bool),
    e: &Expr,
    out: &mut Vec<Diagnostic>,
) {
    if state.is_bottom() {
        return;
    }
    check_uninitialized(init, e, out);
    state.check(e, &mut |ev| out.push(diagnostic_from_event(ev)));
}

pub fn check_uninitialized(init: &dyn Fn(&str) -> (bool, bool), e: &Expr, out: &mut Vec<Diagnostic>) {
    let mut reads = Vec::new();
    collect_reads(e, &mut reads);
    for (name, loc) in reads {
        let (definitely, maybe) = init(&name);
        if definitely {
            continue;
        }
        let severity = if maybe { Severity::Possible } else { Severity::Definite };
        let message = if maybe {
            format!("`{name}` may be used uninitialized")
        } else {
            format!("`{name}` is used uninitialized")
        };
        out.push(Diagnostic {
            kind: DiagKind::UninitializedUse,
            severity,
            loc,
            message,
            variable: Some(name),
        });
    }
}

fn collect_reads(e: &Expr, out: &mut Vec<(String, SourceLoc)>) {
    if let ExprKind::Var(v) = &e.kind {
        out.push((v.clone(), e.loc.clone()));
    }
    for c in e.children() {
        collect_reads(c, out);
    }
}

/// Verdict for `MYASSERT(cond)` reached with `state`.
pub fn check_assert(state: &DomainElem, cond: &Expr, loc: &SourceLoc) -> Verdict {
    let condition = pretty::expr(cond, Default::default());
    let state_at = state.render();
    if state.is_bottom() {
        return Verdict {
            assertion_loc: loc.clone(),
            condition,
            result: VerdictResult::Proven,
            state_at,
            note: Some("vacuous (unreachable)".into()),
        };
    }
    let holds = state.assume(cond, false).is_bottom();
    let fails = state.assume(cond, true).is_bottom();
    let result = match (holds, fails) {
        (true, _) => VerdictResult::Proven,
        (false, true) => VerdictResult::Violated,
        _ => VerdictResult::Unknown,
    };
    Verdict {
        assertion_loc: loc.clone(),
        condition,
        result,
        state_at,
        note: None,
    }
}

/// Exit status: 1 when anything is violated or definitely wrong.
pub fn exit_code(diagnostics: &[Diagnostic], verdicts: &[Verdict]) -> i32 {
    let bad = diagnostics.iter().any(|d| d.severity == Severity::Definite && d.kind != DiagKind::ShiftUnsupported)
        || verdicts.iter().any(|v| v.result == VerdictResult::Violated);
    i32::from(bad)
}
