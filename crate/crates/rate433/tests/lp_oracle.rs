//! The exact solver against a brute-force vertex-enumeration reference on
//! random bounded instances.

mod common;

use common::{oracle_min, random_bounded_instance, OracleVerdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rate433::lp::{solve, LpOutcome};

#[test]
fn engine_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut optimal = 0usize;
    let mut infeasible = 0usize;
    for i in 0..150 {
        let inst = random_bounded_instance(&mut rng);
        let got = solve(&inst).expect("well-formed instance");
        match (got, oracle_min(&inst)) {
            (LpOutcome::Optimal(p), OracleVerdict::Optimal(v)) => {
                assert_eq!(p.objective, v, "instance {i}: objective mismatch");
                optimal += 1;
            }
            (LpOutcome::Infeasible, OracleVerdict::Infeasible) => infeasible += 1,
            (got, OracleVerdict::Optimal(v)) => {
                panic!("instance {i}: solver said {got:?}, oracle found optimum {v}")
            }
            (got, OracleVerdict::Infeasible) => {
                panic!("instance {i}: solver said {got:?}, oracle found nothing feasible")
            }
        }
    }
    // The generator must exercise both verdicts or the comparison is hollow.
    assert!(optimal >= 20, "only {optimal} optimal instances");
    assert!(infeasible >= 20, "only {infeasible} infeasible instances");
}
