//! Structural laws of the variable universe: closure, relabeling, and the
//! class census, checked exhaustively where the space allows it.

mod common;

use common::{orbit_count, system};
use proptest::prelude::*;
use rate433::constraints::InfoExpr;
use rate433::entropy::{closure, NodePermutation, RVSubset};

#[test]
fn closure_is_a_closure_operator() {
    for mask in 0..=u16::MAX {
        let a = RVSubset(mask);
        let cl = closure(a);
        assert!(a.is_subset_of(cl), "not extensive at {mask:#06x}");
        assert_eq!(closure(cl), cl, "not idempotent at {mask:#06x}");
        // Adding one variable never shrinks the closure; chaining this step
        // gives monotonicity for arbitrary inclusions.
        for v in 0..16u16 {
            let grown = RVSubset(mask | (1 << v));
            assert!(
                cl.is_subset_of(closure(grown)),
                "not monotone at {mask:#06x} plus bit {v}"
            );
        }
    }
}

#[test]
fn closure_commutes_with_relabeling() {
    let perms = NodePermutation::all();
    assert_eq!(perms.len(), 24);
    for mask in 0..=u16::MAX {
        let cl = closure(RVSubset(mask));
        for p in &perms {
            assert_eq!(
                closure(p.apply_subset(RVSubset(mask))),
                p.apply_subset(cl),
                "disagreement at {mask:#06x}"
            );
        }
    }
}

#[test]
fn class_census_matches_independent_orbit_count() {
    let counted = orbit_count();
    let counts = &system().counts;
    assert_eq!(counted, counts.classes_total);
    assert_eq!(counts.classes_total, 177);
    assert_eq!(counts.free_classes, 174);
    assert_eq!(counts.entropy_terms, 175);
    assert_eq!(counts.lp_columns, 176);
}

proptest! {
    // Display and parse are mutual inverses on every constructible
    // expression; equality after one round trip pins the textual form.
    #[test]
    fn expression_text_round_trips(a in 1u16..=u16::MAX, b in 1u16..=u16::MAX, cond in 0u16..=u16::MAX, mutual in proptest::bool::ANY) {
        let expr = if mutual {
            let a = RVSubset(a & !cond);
            let b = RVSubset(b & !cond);
            prop_assume!(!a.is_empty() && !b.is_empty());
            InfoExpr::mutual(a, b, RVSubset(cond)).unwrap()
        } else {
            let left = RVSubset(a & !cond);
            prop_assume!(!left.is_empty());
            InfoExpr::entropy(left, RVSubset(cond)).unwrap()
        };
        let text = expr.to_string();
        let parsed: InfoExpr = text.parse().unwrap();
        prop_assert_eq!(parsed.to_string(), text);
    }
}
