//! Domain laws over 1000 seeded cases each.

mod common;

use canalyzer::domains::DomainKind::{self, Interval, Octagon, Sign};
use common::laws;

fn ok(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

macro_rules! per_domain {
    ($($name:ident => $law:expr;)*) => {
        $(
            mod $name {
                use super::*;
                #[test]
                fn interval() {
                    ok(($law)(Interval));
                }
                #[test]
                fn octagon() {
                    ok(($law)(Octagon));
                }
                #[test]
                fn sign() {
                    ok(($law)(Sign));
                }
            }
        )*
    };
}

per_domain! {
    lattice_laws => laws::lattice;
    leq_compatibility => laws::leq_compatible;
    widening_covers => laws::widen_covers;
    widening_stabilizes_one_var => |k: DomainKind| laws::widen_stabilizes(k, 1);
    widening_stabilizes_two_vars => |k: DomainKind| laws::widen_stabilizes(k, 2);
    narrowing_sandwich => laws::narrow_sandwich;
}

#[test]
fn interval_bound_is_three_steps_for_one_variable() {
    assert_eq!(laws::stabilization_bound(Interval, 1), 3);
}

#[test]
fn dbm_closure_two_vars() {
    ok(laws::closure(2));
}

#[test]
fn dbm_closure_three_vars() {
    ok(laws::closure(3));
}
