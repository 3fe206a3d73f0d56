//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles recompute expected values by routes the library never takes:
//! the tradeoff from its closed form, class counts by canonical orbit keys,
//! elemental counts from the binomial formula, and LP optima by exhaustive
//! vertex enumeration.

#![allow(dead_code)]

use num::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rate433::constraints::ReducedSystem;
use rate433::entropy::{closure, NodePermutation, RVSubset};
use rate433::lp::{LpInstance, Rel};
use rate433::rational::{rat, rat_int, Rat};
use std::collections::BTreeSet;
use std::sync::OnceLock;

pub fn system() -> &'static ReducedSystem {
    static SYS: OnceLock<ReducedSystem> = OnceLock::new();
    SYS.get_or_init(ReducedSystem::build)
}

/// Closed form of the tradeoff: the upper envelope of the three boundary
/// lines, undefined left of alpha = 1/3.
pub fn expected_min_beta(alpha: &Rat) -> Option<Rat> {
    if alpha < &rat(1, 3) {
        return None;
    }
    [
        rat_int(1) - rat_int(2) * alpha,
        (rat_int(3) - rat_int(4) * alpha) / rat_int(6),
        rat(1, 6),
    ]
    .into_iter()
    .max()
}

/// Independent class count: every nonempty subset maps to the
/// lexicographically least relabeling of its closure, and distinct keys are
/// counted. The empty set carries no entropy term, so it is out of scope.
pub fn orbit_count() -> usize {
    let perms = NodePermutation::all();
    let mut keys: BTreeSet<u16> = BTreeSet::new();
    for mask in 1..=u16::MAX {
        let cl = closure(RVSubset(mask));
        let key = perms.iter().map(|p| p.apply_subset(cl).0).min().expect("24 perms");
        keys.insert(key);
    }
    keys.len()
}

/// Count of elemental inequalities on `n` variables from the binomial
/// formula: `n` conditional entropies plus `C(n,2) * 2^(n-2)` conditional
/// mutual informations.
pub fn elemental_count_formula(n: u64) -> u64 {
    n + n * (n - 1) / 2 * (1u64 << (n - 2))
}

pub enum OracleVerdict {
    Optimal(Rat),
    Infeasible,
}

/// Brute-force LP reference: enumerate every choice of `n` active planes
/// (rows as equations plus coordinate planes), solve the square system
/// exactly, keep feasible points, and take the best objective. Sound for
/// bounded all-nonnegative instances, which `random_bounded_instance`
/// guarantees by a box row.
pub fn oracle_min(inst: &LpInstance) -> OracleVerdict {
    let n = inst.num_vars;
    let mut planes: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for row in &inst.rows {
        let mut dense = vec![Rat::zero(); n];
        for (k, v) in &row.coeffs {
            dense[*k] += v;
        }
        planes.push((dense, row.rhs.clone()));
    }
    for k in 0..n {
        let mut dense = vec![Rat::zero(); n];
        dense[k] = Rat::one();
        planes.push((dense, Rat::zero()));
    }
    let mut best: Option<Rat> = None;
    for pick in combinations(planes.len(), n) {
        let Some(x) = solve_square(&planes, &pick, n) else {
            continue;
        };
        if !feasible(inst, &x) {
            continue;
        }
        let mut obj = Rat::zero();
        for (c, v) in inst.minimize.iter().zip(&x) {
            obj += c * v;
        }
        best = Some(match best {
            None => obj,
            Some(b) => b.min(obj),
        });
    }
    match best {
        Some(v) => OracleVerdict::Optimal(v),
        None => OracleVerdict::Infeasible,
    }
}

/// Random instance with every variable nonnegative and a box row, so the
/// feasible set is bounded and `oracle_min` is exact.
pub fn random_bounded_instance(rng: &mut ChaCha8Rng) -> LpInstance {
    let n = rng.gen_range(2..=4usize);
    let m = rng.gen_range(1..=5usize);
    let mut inst = LpInstance::new(n);
    inst.nonneg = vec![true; n];
    for c in inst.minimize.iter_mut() {
        *c = rat_int(rng.gen_range(-3..=3));
    }
    for _ in 0..m {
        let coeffs: Vec<(usize, Rat)> =
            (0..n).map(|k| (k, rat_int(rng.gen_range(-3..=3)))).collect();
        let rel = if rng.gen_bool(0.5) { Rel::Le } else { Rel::Ge };
        inst.add_row(coeffs, rel, rat_int(rng.gen_range(-2..=4)));
    }
    let box_row: Vec<(usize, Rat)> = (0..n).map(|k| (k, rat_int(1))).collect();
    inst.add_row(box_row, Rel::Le, rat_int(rng.gen_range(4..=10)));
    inst
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=(n - need) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

fn solve_square(planes: &[(Vec<Rat>, Rat)], pick: &[usize], n: usize) -> Option<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
    let mut rhs: Vec<Rat> = pick.iter().map(|&i| planes[i].1.clone()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        rhs.swap(col, piv);
        let p = a[col][col].clone();
        for t in col..n {
            a[col][t] /= &p;
        }
        rhs[col] /= &p;
        let prow = a[col].clone();
        let pr = rhs[col].clone();
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col].clone();
            if f.is_zero() {
                continue;
            }
            for t in col..n {
                a[r][t] -= &f * &prow[t];
            }
            rhs[r] -= &f * &pr;
        }
    }
    Some(rhs)
}

fn feasible(inst: &LpInstance, x: &[Rat]) -> bool {
    for (k, flag) in inst.nonneg.iter().enumerate() {
        if *flag && x[k].is_negative() {
            return false;
        }
    }
    for row in &inst.rows {
        let mut lhs = Rat::zero();
        for (k, v) in &row.coeffs {
            lhs += v * &x[*k];
        }
        let ok = match row.rel {
            Rel::Le => lhs <= row.rhs,
            Rel::Eq => lhs == row.rhs,
            Rel::Ge => lhs >= row.rhs,
        };
        if !ok {
            return false;
        }
    }
    true
}
