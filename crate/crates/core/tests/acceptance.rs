//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always appear in the output.

mod common;

use std::collections::BTreeMap;

use canalyzer::cfg::{BlockId, TerminatorKind};
use canalyzer::checks::{DiagKind, Severity, VerdictResult};
use canalyzer::domains::bound::{Bound, Itv};
use canalyzer::domains::{AbstractDomain, DomainElem, DomainKind, IntervalElem, VarEnv};
use canalyzer::engine::{AnalysisResult, TraceEvent};
use canalyzer::frontend::types::CType;
use canalyzer::Rational;
use common::laws::DOMAINS;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! expect {
    ($c:expr, $($fmt:tt)+) => {
        if !$c {
            return Err(format!($($fmt)+));
        }
    };
}

fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(common::corpus_dir().join(name)).expect("corpus file")
}

fn run(name: &str, domain: DomainKind, unroll: u32, narrow: u32) -> AnalysisResult {
    common::analyze(&corpus_file(name), domain, unroll, narrow).remove(0)
}

fn itv(lo: Option<i64>, hi: Option<i64>) -> Itv {
    let b = |v: Option<i64>, inf| v.map_or(inf, |v| Bound::int(v as i128));
    Itv::new(b(lo, Bound::NegInf), b(hi, Bound::PosInf)).expect("non-empty")
}

fn k(v: i64) -> Itv {
    itv(Some(v), Some(v))
}

fn var(e: &DomainElem, v: &str) -> Option<Itv> {
    e.project(v)
}

/// The block taken when the (only) loop condition fails.
fn after_loop(r: &AnalysisResult) -> BlockId {
    let head = r
        .cfg
        .blocks
        .iter()
        .find(|b| b.terminator == TerminatorKind::While)
        .expect("a loop");
    head.successors[1]
}

fn condition_example() -> Check {
    let r = run("condition_example.c", DomainKind::Interval, 5, 2);
    let (b4, b3, b2, b1) = (
        r.block_by_display_id(4),
        r.block_by_display_id(3),
        r.block_by_display_id(2),
        r.block_by_display_id(1),
    );
    expect!(r.cfg.block(b4).terminator == TerminatorKind::If, "B4 is not the branch");
    let exit_x = var(r.entry_state(b1), "x");
    expect!(exit_x == Some(k(100)), "final block x = {exit_x:?}");
    let t = var(r.entry_state(b3), "x");
    expect!(t == Some(k(10)), "true branch x = {t:?}");
    expect!(r.entry_state(b2).is_bottom(), "false branch is not bottom");
    let meets: Vec<_> = r
        .trace
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Meet { block, state } => Some((*block, state.clone())),
            _ => None,
        })
        .collect();
    expect!(
        meets.iter().any(|(b, s)| *b == b3 && var(s, "x") == Some(k(10))),
        "no [10,10] meet at B3 in the trace"
    );
    expect!(meets.iter().any(|(b, s)| *b == b2 && s.is_bottom()), "no bottom meet at B2 in the trace");
    let sum = r.table.get(b4);
    let pos = sum.cond_pos.as_ref().and_then(|c| var(c, "x"));
    let neg = sum.cond_neg.as_ref().and_then(|c| var(c, "x"));
    expect!(pos == Some(itv(Some(1), None)), "condition true abstraction {pos:?}");
    expect!(neg == Some(itv(None, Some(0))), "condition false abstraction {neg:?}");
    Ok(())
}

fn loop_unroll_five() -> Check {
    let r = run("loop_example.c", DomainKind::Interval, 5, 0);
    let post = r.entry_state(after_loop(&r));
    let (a, b) = (var(post, "a"), var(post, "b"));
    expect!(a == Some(k(0)) && b == Some(k(2)), "post-loop a = {a:?}, b = {b:?}");
    let fix = r.trace.iter().find_map(|e| match e {
        TraceEvent::Widen {
            block,
            fixpoint: true,
            old,
            current,
            ..
        } => Some((*block, old, current)),
        _ => None,
    });
    let Some((src, old, current)) = fix else {
        return Err("no fixpoint in the trace".into());
    };
    expect!(r.cfg.block(src).is_back_edge_source, "fixpoint reported off a back-edge source");
    for s in [old, current] {
        let (a, b) = (var(s, "a"), var(s, "b"));
        expect!(
            a == Some(itv(Some(0), Some(5))) && b == Some(k(2)),
            "fixpoint state a = {a:?}, b = {b:?}"
        );
    }
    Ok(())
}

fn loop_unroll_one() -> Check {
    let r = run("loop_example.c", DomainKind::Interval, 1, 0);
    let post = r.entry_state(after_loop(&r));
    let a = var(post, "a");
    expect!(a == Some(itv(None, Some(0))), "post-loop a = {a:?}");
    let b = var(post, "b");
    expect!(b.as_ref().is_some_and(|b| b.contains(&Rational::from_integer(2.into()))), "b = {b:?} misses 2");
    Ok(())
}

fn operator_tables() -> Check {
    let env = VarEnv::new(vec![("x".into(), CType::INT)]);
    let e = |i: Itv| IntervalElem::from_intervals(&env, vec![i]);
    let i = |lo: i64, hi: i64| e(itv(Some(lo), Some(hi)));
    let cases = [
        ("[2,3] widen [1,4]", i(2, 3).widen(&i(1, 4)), e(itv(None, None))),
        ("[0,1] widen [0,2]", i(0, 1).widen(&i(0, 2)), e(itv(Some(0), None))),
        ("[1,4] widen [2,3]", i(1, 4).widen(&i(2, 3)), i(1, 4)),
        (
            "[-oo,+oo] narrow [-oo,101]",
            e(itv(None, None)).narrow(&e(itv(None, Some(101)))),
            e(itv(None, Some(101))),
        ),
        ("[1,+oo] narrow [50,100]", e(itv(Some(1), None)).narrow(&i(50, 100)), i(1, 100)),
        ("[1,4] narrow [2,3]", i(1, 4).narrow(&i(2, 3)), i(1, 4)),
    ];
    for (name, got, want) in cases {
        expect!(got == want, "{name}: got {}", got.render());
    }
    let (bot, top, x) = (IntervalElem::bottom(&env), IntervalElem::top(&env), i(3, 7));
    let rules = [
        ("x widen bottom", x.widen(&bot), x.clone()),
        ("bottom widen x", bot.widen(&x), x.clone()),
        ("x widen top", x.widen(&top), top.clone()),
        ("top widen x", top.widen(&x), top.clone()),
        ("x narrow bottom", x.narrow(&bot), bot.clone()),
        ("bottom narrow x", bot.narrow(&x), bot.clone()),
        ("x narrow top", x.narrow(&top), x.clone()),
        ("top narrow x", top.narrow(&x), x.clone()),
    ];
    for (name, got, want) in rules {
        expect!(got == want, "{name}: got {}", got.render());
    }
    Ok(())
}

fn galois_example() -> Check {
    let env = VarEnv::new(vec![("x".into(), CType::INT)]);
    let q = |v: i64| Rational::from_integer(v.into());
    let points: Vec<Vec<Rational>> = [2, 4, 6, 8, 10].iter().map(|v| vec![q(*v)]).collect();
    let a = DomainElem::alpha_points(DomainKind::Interval, &env, &points);
    expect!(var(&a, "x") == Some(itv(Some(2), Some(10))), "alpha = {}", a.render());
    let gamma: Vec<i64> = (0..=12).filter(|v| a.contains(&[q(*v)])).collect();
    expect!(gamma == (2..=10).collect::<Vec<_>>(), "gamma within [0,12] = {gamma:?}");
    Ok(())
}

fn property_suite() -> Check {
    let failed: Vec<String> = common::laws::all()
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    expect!(failed.is_empty(), "{}", failed.join("; "));
    Ok(())
}

fn soundness_oracle() -> Check {
    let corpus = common::corpus();
    expect!(corpus.len() >= 30, "only {} corpus programs", corpus.len());
    for d in DOMAINS {
        for (name, src) in &corpus {
            for r in common::analyze(src, d, 5, 2) {
                if let Some(msg) = common::soundness_violation(name, &r) {
                    return Err(msg);
                }
            }
        }
    }
    Ok(())
}

fn precision_ordering() -> Check {
    for (name, src) in common::corpus() {
        let oct = common::analyze(&src, DomainKind::Octagon, 5, 2);
        let itv = common::analyze(&src, DomainKind::Interval, 5, 2);
        for (o, i) in oct.iter().zip(&itv) {
            for &b in &i.cfg.block_list {
                let (os, is) = (o.entry_state(b), i.entry_state(b));
                if os.is_bottom() {
                    continue;
                }
                let (Some(op), Some(ip)) = (os.projections(), is.projections()) else {
                    return Err(format!("{name}: B{} interval bottom, octagon not", i.cfg.display_id(b)));
                };
                for ((v, a), (_, c)) in op.iter().zip(&ip) {
                    expect!(a.leq(c), "{name}: B{} {v}: octagon {a} vs interval {c}", i.cfg.display_id(b));
                }
            }
        }
    }
    let o = run("octagon_sum.c", DomainKind::Octagon, 5, 2);
    let i = run("octagon_sum.c", DomainKind::Interval, 5, 2);
    let (ob, ib) = (after_loop(&o), after_loop(&i));
    let (oy, iy) = (var(o.entry_state(ob), "y"), var(i.entry_state(ib), "y"));
    expect!(
        matches!((&oy, &iy), (Some(a), Some(b)) if a.leq(b) && a != b),
        "octagon_sum.c post-loop y: octagon {oy:?}, interval {iy:?}"
    );
    Ok(())
}

fn cli_exit(src: &str) -> i32 {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("p.c");
    std::fs::write(&path, src).expect("write");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    canalyzer::cli::run(["canalyzer", path.to_str().unwrap()], &mut out, &mut err)
}

fn checks_fire() -> Check {
    let r = run("checks_definite.c", DomainKind::Interval, 5, 2);
    let has = |r: &AnalysisResult, kind: DiagKind, sev: Severity| {
        r.diagnostics.iter().any(|d| d.kind == kind && d.severity == sev)
    };
    expect!(has(&r, DiagKind::DivByZero, Severity::Definite), "1/y with y = 0 not definite");
    expect!(has(&r, DiagKind::Overflow, Severity::Definite), "INT_MAX + 1 not reported");
    expect!(
        r.diagnostics
            .iter()
            .any(|d| d.kind == DiagKind::UninitializedUse && d.variable.as_deref() == Some("z")),
        "read of z before write not reported"
    );
    let p = run("checks_possible.c", DomainKind::Interval, 5, 2);
    let y = p
        .cfg
        .block_list
        .iter()
        .rev()
        .find_map(|b| var(p.entry_state(*b), "y").filter(|i| *i == itv(Some(-1), Some(1))));
    expect!(y.is_some(), "y never reaches [-1,1]");
    expect!(has(&p, DiagKind::DivByZero, Severity::Possible), "1/y with y in [-1,1] not possible");
    expect!(!has(&p, DiagKind::DivByZero, Severity::Definite), "1/y with y in [-1,1] reported definite");
    let v = run("assertion_verdicts.c", DomainKind::Interval, 5, 2);
    let results: Vec<_> = v.verdicts.iter().map(|v| v.result).collect();
    expect!(
        results == [VerdictResult::Proven, VerdictResult::Violated, VerdictResult::Unknown],
        "verdicts {results:?}"
    );
    let codes = [
        cli_exit(&corpus_file("count_to_ten.c")),
        cli_exit(&corpus_file("checks_definite.c")),
        cli_exit("int main() { return 0 }"),
    ];
    expect!(codes == [0, 1, 2], "exit codes {codes:?}");
    Ok(())
}

fn narrowing_recovery() -> Check {
    let r = run("count_to_hundred.c", DomainKind::Interval, 1, 2);
    let post = after_loop(&r);
    let i = var(r.entry_state(post), "i");
    expect!(i == Some(k(100)), "post-loop i = {i:?}");
    let concrete = common::execute(&r.cfg, &r.env, &BTreeMap::new());
    let seen: Vec<_> = concrete.visits.iter().filter(|(b, _)| *b == post).map(|(_, s)| s.clone()).collect();
    expect!(
        seen == [vec![Rational::from_integer(100.into())]],
        "concrete post-loop stores {seen:?}"
    );
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("condition example", condition_example),
        ("loop example, unroll 5, no narrowing", loop_unroll_five),
        ("loop example, unroll 1, no narrowing", loop_unroll_one),
        ("widening and narrowing tables", operator_tables),
        ("abstraction and concretization", galois_example),
        ("property suite", property_suite),
        ("soundness oracle", soundness_oracle),
        ("octagon precision", precision_ordering),
        ("implicit checks, verdicts and exit codes", checks_fire),
        ("narrowing recovery", narrowing_recovery),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("criterion {}: PASS  {name}", n + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {e}", n + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
