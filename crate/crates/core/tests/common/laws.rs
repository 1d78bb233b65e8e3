//! Algebraic laws of the domains, checked with a seeded proptest runner.

use std::sync::Arc;

use canalyzer::domains::bound::{Bound, Itv};
use canalyzer::domains::octagon::Dbm;
use canalyzer::domains::{AbstractDomain, DomainElem, DomainKind, IntervalElem, OctagonElem, Sign, SignElem, VarEnv};
use canalyzer::frontend::types::CType;
use canalyzer::Rational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;
const SEED: [u8; 32] = *b"octagons, intervals and signs!!!";

pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

pub fn env(n: usize) -> Arc<VarEnv> {
    VarEnv::new((0..n).map(|i| (format!("x{i}"), CType::INT)).collect())
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn bound() -> impl Strategy<Value = Option<i64>> {
    prop_oneof![1 => Just(None), 6 => (-12i64..=12).prop_map(Some)]
}

fn interval(env: Arc<VarEnv>) -> impl Strategy<Value = DomainElem> {
    let n = env.len();
    (prop::collection::vec((bound(), bound()), n), prop::bool::weighted(0.05)).prop_map(move |(bs, bot)| {
        let itvs: Option<Vec<Itv>> = bs
            .into_iter()
            .map(|(l, h)| {
                Itv::new(
                    l.map_or(Bound::NegInf, |v| Bound::Finite(q(v))),
                    h.map_or(Bound::PosInf, |v| Bound::Finite(q(v))),
                )
            })
            .collect();
        match itvs {
            Some(v) if !bot => DomainElem::Interval(IntervalElem::from_intervals(&env, v)),
            _ => DomainElem::bottom(DomainKind::Interval, &env),
        }
    })
}

/// One octagonal constraint: variables, signs and constant.
type Cons = (usize, bool, Option<(usize, bool)>, i64);

fn cons(n: usize) -> impl Strategy<Value = Cons> {
    (0..n, any::<bool>(), prop::option::weighted(0.6, (0..n, any::<bool>())), -10i64..=10)
}

fn octagon(env: Arc<VarEnv>) -> impl Strategy<Value = DomainElem> {
    let n = env.len();
    prop::collection::vec(cons(n), 0..7).prop_map(move |cs| {
        let mut o = OctagonElem::top(&env);
        for (a, pa, b, c) in cs {
            let na = env.name(a).to_string();
            o = match b {
                Some((b, pb)) if b != a => {
                    let nb = env.name(b).to_string();
                    o.constrain(&[(&na, pa), (&nb, pb)], q(c))
                }
                _ => o.constrain(&[(&na, pa)], q(c)),
            };
        }
        DomainElem::Octagon(o)
    })
}

fn sign(env: Arc<VarEnv>) -> impl Strategy<Value = DomainElem> {
    let n = env.len();
    prop::collection::vec(prop_oneof![1 => Just(0u8), 12 => 1u8..8], n)
        .prop_map(move |v| DomainElem::Sign(SignElem::from_signs(&env, v.into_iter().map(Sign).collect())))
}

pub fn elem(kind: DomainKind, env: Arc<VarEnv>) -> BoxedStrategy<DomainElem> {
    match kind {
        DomainKind::Interval => interval(env).boxed(),
        DomainKind::Octagon => octagon(env).boxed(),
        DomainKind::Sign => sign(env).boxed(),
    }
}

fn leq(a: &DomainElem, b: &DomainElem) -> bool {
    a.leq(b).expect("same domain")
}

fn eqv(a: &DomainElem, b: &DomainElem) -> bool {
    a.equivalent(b).expect("same domain")
}

fn join(a: &DomainElem, b: &DomainElem) -> DomainElem {
    a.join(b).expect("same domain")
}

fn meet(a: &DomainElem, b: &DomainElem) -> DomainElem {
    a.meet(b).expect("same domain")
}

fn widen(a: &DomainElem, b: &DomainElem) -> DomainElem {
    a.widen(b).expect("same domain")
}

macro_rules! ensure {
    ($c:expr, $($fmt:tt)+) => {
        if !$c {
            return Err(TestCaseError::fail(format!($($fmt)+)));
        }
    };
}

/// Integer points of `[-4,4]^n`.
fn points(n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-4..=4).map(move |v| {
                    let mut p = p.clone();
                    p.push(q(v));
                    p
                })
            })
            .collect();
    }
    out
}

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

/// Commutativity, associativity, idempotence, absorption and the ⊥/⊤
/// identities of join and meet.
pub fn lattice(kind: DomainKind) -> Result<(), String> {
    let env = env(2);
    let e = elem(kind, env.clone());
    let (bot, top) = (DomainElem::bottom(kind, &env), DomainElem::top(kind, &env));
    run((e.clone(), e.clone(), e), move |(a, b, c)| {
        ensure!(eqv(&join(&a, &b), &join(&b, &a)), "join not commutative");
        ensure!(eqv(&meet(&a, &b), &meet(&b, &a)), "meet not commutative");
        ensure!(
            eqv(&join(&join(&a, &b), &c), &join(&a, &join(&b, &c))),
            "join not associative"
        );
        ensure!(
            eqv(&meet(&meet(&a, &b), &c), &meet(&a, &meet(&b, &c))),
            "meet not associative"
        );
        ensure!(eqv(&join(&a, &a), &a) && eqv(&meet(&a, &a), &a), "not idempotent");
        ensure!(eqv(&join(&a, &meet(&a, &b)), &a), "join absorption fails");
        ensure!(eqv(&meet(&a, &join(&a, &b)), &a), "meet absorption fails");
        ensure!(eqv(&join(&a, &bot), &a) && eqv(&meet(&a, &top), &a), "identity fails");
        ensure!(join(&a, &top).equivalent(&top).unwrap() && meet(&a, &bot).is_bottom(), "annihilator fails");
        ensure!(leq(&a, &join(&a, &b)) && leq(&meet(&a, &b), &a), "bounds fail");
        Ok(())
    })
}

/// `a ⊑ b` iff `a ⊔ b ≡ b` iff `a ⊓ b ≡ a`, and `⊑` agrees with inclusion
/// of the integer points of a small box.
pub fn leq_compatible(kind: DomainKind) -> Result<(), String> {
    let env = env(2);
    let pts = points(2);
    let e = elem(kind, env);
    let pair = (e.clone(), e).prop_flat_map(|(a, b)| {
        // Bias towards comparable pairs.
        prop_oneof![Just((a.clone(), b.clone())), Just((meet(&a, &b), b.clone())), Just((a.clone(), join(&a, &b)))]
    });
    run(pair, move |(a, b)| {
        let le = leq(&a, &b);
        ensure!(le == eqv(&join(&a, &b), &b), "leq disagrees with join: {a:?} {b:?}");
        ensure!(le == eqv(&meet(&a, &b), &a), "leq disagrees with meet: {a:?} {b:?}");
        if le {
            ensure!(
                pts.iter().all(|p| !a.contains(p) || b.contains(p)),
                "leq without inclusion: {a:?} {b:?}"
            );
        }
        for p in &pts {
            ensure!(
                join(&a, &b).contains(p) || !(a.contains(p) || b.contains(p)),
                "join loses a point"
            );
            ensure!(
                meet(&a, &b).contains(p) == (a.contains(p) && b.contains(p)),
                "meet is not intersection"
            );
        }
        Ok(())
    })
}

/// `a ⊑ a ▽ b` and `b ⊑ a ▽ b`.
pub fn widen_covers(kind: DomainKind) -> Result<(), String> {
    let e = elem(kind, env(2));
    run((e.clone(), e), |(a, b)| {
        let w = widen(&a, &b);
        ensure!(leq(&a, &w) && leq(&b, &w), "widening does not cover: {a:?} {b:?} {w:?}");
        Ok(())
    })
}

/// Largest number of strict increases of a widening sequence over `n`
/// variables.
pub fn stabilization_bound(kind: DomainKind, n: usize) -> usize {
    match kind {
        DomainKind::Interval | DomainKind::Sign => 2 * n + 1,
        DomainKind::Octagon => 2 * n * n + 2,
    }
}

/// Along any increasing chain `x_0 ⊑ x_1 ⊑ ...`, the sequence `y_0 = x_0`,
/// `y_k+1 = y_k ▽ x_k+1` strictly increases at most the bound number of
/// times.
pub fn widen_stabilizes(kind: DomainKind, n: usize) -> Result<(), String> {
    let e = elem(kind, env(n));
    let limit = stabilization_bound(kind, n);
    run((e.clone(), prop::collection::vec(e, 1..40)), move |(x0, steps)| {
        let mut x = x0.clone();
        let mut y = x0;
        let mut increases = 0;
        for r in steps {
            x = join(&x, &r);
            let next = widen(&y, &x);
            ensure!(leq(&y, &next), "widening sequence decreased");
            if !eqv(&next, &y) {
                increases += 1;
            }
            y = next;
        }
        ensure!(increases <= limit, "{increases} strict increases, bound {limit}");
        Ok(())
    })
}

/// `b ⊑ a` implies `b ⊑ a △ b ⊑ a`.
pub fn narrow_sandwich(kind: DomainKind) -> Result<(), String> {
    let e = elem(kind, env(2));
    run((e.clone(), e), |(a, b)| {
        let b = meet(&a, &b);
        let n = a.narrow(&b).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure!(leq(&b, &n) && leq(&n, &a), "narrowing outside [b, a]: {a:?} {b:?} {n:?}");
        Ok(())
    })
}

fn raw_dbm(vars: usize) -> impl Strategy<Value = Dbm> {
    let d = 2 * vars;
    prop::collection::vec((0..d, 0..d, -8i64..=8), 0..10).prop_map(move |cs| {
        let mut m = Dbm::top(vars);
        for (i, j, c) in cs {
            if i != j {
                m.tighten(i, j, q(c));
            }
        }
        m
    })
}

fn satisfies(m: &Dbm, p: &[Rational]) -> bool {
    let v = |i: usize| if i.is_multiple_of(2) { p[i / 2].clone() } else { -p[i / 2].clone() };
    (0..m.dim()).all(|i| (0..m.dim()).all(|j| m.get(i, j).as_ref().is_none_or(|c| v(j) - v(i) <= *c)))
}

/// Closure is idempotent, keeps the matrix coherent, has a zero diagonal and
/// keeps exactly the integer points of the original matrix.
pub fn closure(vars: usize) -> Result<(), String> {
    let integral = vec![true; vars];
    let pts = points(vars);
    run(raw_dbm(vars), move |raw| {
        let mut c1 = raw.clone();
        let nonempty = c1.close(&integral);
        for p in &pts {
            ensure!(
                satisfies(&raw, p) == (nonempty && satisfies(&c1, p)),
                "closure changed the points of {raw:?}"
            );
        }
        if !nonempty {
            return Ok(());
        }
        let mut c2 = c1.clone();
        ensure!(c2.close(&integral) && c2 == c1, "closure not idempotent: {c1:?} then {c2:?}");
        let d = c1.dim();
        for i in 0..d {
            ensure!(c1.get(i, i).as_ref().is_some_and(|c| *c == q(0)), "diagonal not zero");
            for j in 0..d {
                ensure!(c1.get(i, j) == c1.get(j ^ 1, i ^ 1), "incoherent at ({i},{j})");
            }
        }
        Ok(())
    })
}

pub const DOMAINS: [DomainKind; 3] = [DomainKind::Interval, DomainKind::Octagon, DomainKind::Sign];

/// Every law with its name, for every domain.
pub fn all() -> Vec<(String, Result<(), String>)> {
    let mut out = Vec::new();
    for k in DOMAINS {
        out.push((format!("{k} lattice laws"), lattice(k)));
        out.push((format!("{k} leq compatibility"), leq_compatible(k)));
        out.push((format!("{k} widening covers"), widen_covers(k)));
        out.push((format!("{k} widening stabilizes (1 var)"), widen_stabilizes(k, 1)));
        out.push((format!("{k} widening stabilizes (2 vars)"), widen_stabilizes(k, 2)));
        out.push((format!("{k} narrowing sandwich"), narrow_sandwich(k)));
    }
    out.push(("dbm closure (2 vars)".into(), closure(2)));
    out.push(("dbm closure (3 vars)".into(), closure(3)));
    out
}
