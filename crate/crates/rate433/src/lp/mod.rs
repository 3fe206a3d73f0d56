//! Exact linear programming.
//!
//! Instances are stated over free-by-default variables with `<=`, `==`, `>=`
//! rows and are solved by two-phase revised simplex in rational arithmetic.
//! A floating-point simplex runs first as a basis oracle; its guess is only
//! adopted after exact validation, and a guess that fails falls through to
//! the all-rational solver. Every `Optimal` outcome is checked against the
//! full optimality conditions (primal feasibility, dual feasibility,
//! complementary slackness, matching objectives) before being returned, so a
//! wrong answer cannot escape this module silently.

mod float;
mod simplex;

pub use simplex::WarmState;

use crate::error::{Error, Result};
use crate::rational::Rat;
use float::FloatVerdict;
use num::{One, Signed, Zero};
use simplex::{Core, PhaseEnd};
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

/// `minimize c.x` subject to rows. Variables are free unless flagged in
/// `nonneg`.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub num_vars: usize,
    pub minimize: Vec<Rat>,
    pub rows: Vec<LpRow>,
    pub nonneg: Vec<bool>,
}

impl LpInstance {
    pub fn new(num_vars: usize) -> LpInstance {
        LpInstance {
            num_vars,
            minimize: vec![Rat::zero(); num_vars],
            rows: Vec::new(),
            nonneg: vec![false; num_vars],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, rel: Rel, rhs: Rat) {
        self.rows.push(LpRow { coeffs, rel, rhs });
    }

    fn validate(&self) -> Result<()> {
        if self.minimize.len() != self.num_vars || self.nonneg.len() != self.num_vars {
            return Err(Error::MalformedLp("objective or bound list length mismatch".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (k, _) in &row.coeffs {
                if *k >= self.num_vars {
                    return Err(Error::MalformedLp(format!(
                        "row {i} references variable {k} of {}",
                        self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimalPoint {
    pub objective: Rat,
    pub x: Vec<Rat>,
    /// One multiplier per row. Signs follow the minimize orientation:
    /// nonnegative on `>=` rows, nonpositive on `<=` rows, free on `==` rows,
    /// with `objective == sum(duals[i] * rhs[i])`.
    pub row_duals: Vec<Rat>,
    pub iterations: u64,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(OptimalPoint),
    Infeasible,
    Unbounded,
}

struct Standard {
    m: usize,
    cols: Vec<Vec<(usize, Rat)>>,
    cost: Vec<Rat>,
    b: Vec<Rat>,
    flipped: Vec<bool>,
    plus_col: Vec<usize>,
    minus_col: Vec<Option<usize>>,
    fingerprint: u64,
}

fn standardize(inst: &LpInstance) -> Result<Standard> {
    inst.validate()?;
    let m = inst.rows.len();
    let mut plus_col = Vec::with_capacity(inst.num_vars);
    let mut minus_col = Vec::with_capacity(inst.num_vars);
    let mut ncols = 0usize;
    for k in 0..inst.num_vars {
        plus_col.push(ncols);
        ncols += 1;
        if inst.nonneg[k] {
            minus_col.push(None);
        } else {
            minus_col.push(Some(ncols));
            ncols += 1;
        }
    }
    let slack_base = ncols;
    for row in &inst.rows {
        if row.rel != Rel::Eq {
            ncols += 1;
        }
    }
    let mut cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); ncols];
    let mut b = Vec::with_capacity(m);
    let mut flipped = Vec::with_capacity(m);
    let mut slack_at = slack_base;
    for (i, row) in inst.rows.iter().enumerate() {
        let flip = row.rhs.is_negative();
        flipped.push(flip);
        let sign = if flip { -Rat::one() } else { Rat::one() };
        let mut merged: BTreeMap<usize, Rat> = BTreeMap::new();
        for (k, v) in &row.coeffs {
            *merged.entry(*k).or_insert_with(Rat::zero) += v;
        }
        for (k, v) in merged {
            if v.is_zero() {
                continue;
            }
            let signed = &v * &sign;
            cols[plus_col[k]].push((i, signed.clone()));
            if let Some(mc) = minus_col[k] {
                cols[mc].push((i, -signed));
            }
        }
        match row.rel {
            Rel::Eq => {}
            Rel::Le => {
                cols[slack_at].push((i, sign.clone()));
                slack_at += 1;
            }
            Rel::Ge => {
                cols[slack_at].push((i, -sign.clone()));
                slack_at += 1;
            }
        }
        b.push(if flip { -row.rhs.clone() } else { row.rhs.clone() });
    }
    let mut cost = vec![Rat::zero(); ncols];
    for k in 0..inst.num_vars {
        cost[plus_col[k]] = inst.minimize[k].clone();
        if let Some(mc) = minus_col[k] {
            cost[mc] = -inst.minimize[k].clone();
        }
    }
    let mut hasher = DefaultHasher::new();
    inst.num_vars.hash(&mut hasher);
    inst.nonneg.hash(&mut hasher);
    for row in &inst.rows {
        row.rel.hash(&mut hasher);
        row.rhs.to_string().hash(&mut hasher);
        let mut sorted: Vec<(usize, String)> =
            row.coeffs.iter().map(|(k, v)| (*k, v.to_string())).collect();
        sorted.sort();
        sorted.hash(&mut hasher);
    }
    Ok(Standard { m, cols, cost, b, flipped, plus_col, minus_col, fingerprint: hasher.finish() })
}

pub fn solve(inst: &LpInstance) -> Result<LpOutcome> {
    solve_with_warm(inst, None).map(|(outcome, _)| outcome)
}

/// Solves, optionally resuming from a prior optimal basis of a structurally
/// identical instance. Returns the new reusable state alongside the outcome.
pub fn solve_with_warm(
    inst: &LpInstance,
    warm: Option<&WarmState>,
) -> Result<(LpOutcome, Option<WarmState>)> {
    // A stale warm basis close to the new optimum beats any restart, but a
    // distant one walks an exact pivot path that costs far more than a fresh
    // float guess. The budget caps the loss before switching strategies.
    const WARM_PIVOT_BUDGET: u64 = 32;
    let std = standardize(inst)?;
    if let Some(w) = warm {
        if w.fingerprint == std.fingerprint {
            if let Some(core) =
                Core::from_warm(&std.cols, &std.b, w.basis.clone(), w.binv.clone())
            {
                if let Finished::Done(out) =
                    finish(inst, &std, core, Some(WARM_PIVOT_BUDGET))?
                {
                    return Ok(out);
                }
            }
        }
    }
    // Basis oracle: a float simplex guesses, exact arithmetic decides. A
    // rejected guess costs one retry, never correctness. The perturbed pass
    // breaks the ties that make combinatorial right-hand sides crawl; the
    // unperturbed pass covers instances the perturbation distorts.
    for perturb in [1e-9, 0.0] {
        match float::solve_float(&std, perturb) {
            FloatVerdict::Optimal { basis } | FloatVerdict::Unbounded { basis } => {
                if let Some(binv) = simplex::invert_basis(&std.cols, std.m, &basis) {
                    if let Some(core) = Core::from_warm(&std.cols, &std.b, basis, binv) {
                        if let Finished::Done(out) = finish(inst, &std, core, None)? {
                            return Ok(out);
                        }
                    }
                }
            }
            FloatVerdict::Infeasible { basis } => {
                if confirm_infeasible(&std, &basis) {
                    return Ok((LpOutcome::Infeasible, None));
                }
            }
            FloatVerdict::GaveUp => {}
        }
    }
    let mut core = Core::artificial_start(&std.cols, &std.b);
    match core.run_phase(None, None)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded | PhaseEnd::Budget => {
            unreachable!("phase one is bounded below and unbudgeted")
        }
    }
    if !core.artificial_mass().is_zero() {
        return Ok((LpOutcome::Infeasible, None));
    }
    core.purge_artificials();
    match finish(inst, &std, core, None)? {
        Finished::Done(out) => Ok(out),
        Finished::OverBudget => unreachable!("terminal path runs without a budget"),
    }
}

enum Finished {
    Done((LpOutcome, Option<WarmState>)),
    OverBudget,
}

/// Exact phase 2 from a primal-feasible basis, then extraction and the full
/// optimality audit.
fn finish(
    inst: &LpInstance,
    std: &Standard,
    mut core: Core<'_>,
    budget: Option<u64>,
) -> Result<Finished> {
    match core.run_phase(Some(&std.cost), budget)? {
        PhaseEnd::Budget => Ok(Finished::OverBudget),
        PhaseEnd::Unbounded => Ok(Finished::Done((LpOutcome::Unbounded, None))),
        PhaseEnd::Optimal => {
            let xs = core.structural_values();
            let mut x = Vec::with_capacity(inst.num_vars);
            for k in 0..inst.num_vars {
                let mut v = xs[std.plus_col[k]].clone();
                if let Some(mc) = std.minus_col[k] {
                    v -= &xs[mc];
                }
                x.push(v);
            }
            let y_std = core.y_vector(Some(&std.cost));
            let row_duals: Vec<Rat> = y_std
                .iter()
                .zip(&std.flipped)
                .map(|(y, flip)| if *flip { -y.clone() } else { y.clone() })
                .collect();
            let mut objective = Rat::zero();
            for (c, v) in inst.minimize.iter().zip(&x) {
                objective += c * v;
            }
            verify_optimal(inst, &x, &row_duals, &objective);
            let point =
                OptimalPoint { objective, x, row_duals, iterations: core.iterations };
            let state = WarmState {
                fingerprint: std.fingerprint,
                basis: core.basis.clone(),
                binv: core.binv.clone(),
            };
            Ok(Finished::Done((LpOutcome::Optimal(point), Some(state))))
        }
    }
}

/// Exact Farkas check for a basis the float layer claims certifies
/// infeasibility. With `y` the phase-1 prices of that basis, the system
/// `Ax = b, x >= 0` is infeasible when `y.b > 0` and `y.A_j <= 0` for every
/// column, regardless of where `y` came from.
fn confirm_infeasible(std: &Standard, basis: &[usize]) -> bool {
    let Some(binv) = simplex::invert_basis(&std.cols, std.m, basis) else {
        return false;
    };
    let n_struct = std.cols.len();
    let mut y = vec![Rat::zero(); std.m];
    for (i, &j) in basis.iter().enumerate() {
        if j >= n_struct {
            for (t, yt) in y.iter_mut().enumerate() {
                if !binv[i][t].is_zero() {
                    *yt += &binv[i][t];
                }
            }
        }
    }
    let mut yb = Rat::zero();
    for (t, bt) in std.b.iter().enumerate() {
        if !y[t].is_zero() && !bt.is_zero() {
            yb += &y[t] * bt;
        }
    }
    if !yb.is_positive() {
        return false;
    }
    for col in &std.cols {
        let mut v = Rat::zero();
        for (r, val) in col {
            if !y[*r].is_zero() {
                v += &y[*r] * val;
            }
        }
        if v.is_positive() {
            return false;
        }
    }
    true
}

/// Full exact optimality check. A failure here is a solver defect, never a
/// property of the input, so it aborts loudly.
fn verify_optimal(inst: &LpInstance, x: &[Rat], duals: &[Rat], objective: &Rat) {
    for (k, flag) in inst.nonneg.iter().enumerate() {
        assert!(!(*flag && x[k].is_negative()), "variable {k} violates nonnegativity");
    }
    let mut dual_objective = Rat::zero();
    for (i, row) in inst.rows.iter().enumerate() {
        let mut lhs = Rat::zero();
        for (k, v) in &row.coeffs {
            lhs += v * &x[*k];
        }
        let slack = &lhs - &row.rhs;
        let ok = match row.rel {
            Rel::Le => !slack.is_positive(),
            Rel::Eq => slack.is_zero(),
            Rel::Ge => !slack.is_negative(),
        };
        assert!(ok, "row {i} infeasible at claimed optimum");
        let y = &duals[i];
        let sign_ok = match row.rel {
            Rel::Le => !y.is_positive(),
            Rel::Eq => true,
            Rel::Ge => !y.is_negative(),
        };
        assert!(sign_ok, "row {i} dual has wrong sign");
        assert!(
            y.is_zero() || slack.is_zero(),
            "row {i} breaks complementary slackness"
        );
        dual_objective += y * &row.rhs;
    }
    assert_eq!(
        &dual_objective, objective,
        "dual and primal objectives disagree"
    );
    // Reduced costs: zero on free variables, nonnegative on sign-restricted
    // ones, zero wherever the variable is strictly positive.
    let mut col_terms: Vec<Vec<(usize, &Rat)>> = vec![Vec::new(); inst.num_vars];
    for (i, row) in inst.rows.iter().enumerate() {
        if duals[i].is_zero() {
            continue;
        }
        for (k, v) in &row.coeffs {
            col_terms[*k].push((i, v));
        }
    }
    for k in 0..inst.num_vars {
        let mut rc = inst.minimize[k].clone();
        for &(i, v) in &col_terms[k] {
            rc -= &duals[i] * v;
        }
        if inst.nonneg[k] {
            assert!(!rc.is_negative(), "variable {k} has negative reduced cost");
            assert!(
                x[k].is_zero() || rc.is_zero(),
                "variable {k} breaks complementary slackness"
            );
        } else {
            assert!(rc.is_zero(), "free variable {k} has nonzero reduced cost");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn optimal(outcome: LpOutcome) -> OptimalPoint {
        match outcome {
            LpOutcome::Optimal(p) => p,
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn tiny_bounded_minimum() {
        // minimize x + y subject to x + y >= 1, x - y <= 2, x,y >= 0
        let mut lp = LpInstance::new(2);
        lp.minimize = vec![rat_int(1), rat_int(1)];
        lp.nonneg = vec![true, true];
        lp.add_row(vec![(0, rat_int(1)), (1, rat_int(1))], Rel::Ge, rat_int(1));
        lp.add_row(vec![(0, rat_int(1)), (1, rat_int(-1))], Rel::Le, rat_int(2));
        let p = optimal(solve(&lp).unwrap());
        assert_eq!(p.objective, rat_int(1));
    }

    #[test]
    fn free_variable_equality() {
        // minimize y subject to y - x == 3, x == 1, both free.
        let mut lp = LpInstance::new(2);
        lp.minimize = vec![rat_int(0), rat_int(1)];
        lp.add_row(vec![(1, rat_int(1)), (0, rat_int(-1))], Rel::Eq, rat_int(3));
        lp.add_row(vec![(0, rat_int(1))], Rel::Eq, rat_int(1));
        let p = optimal(solve(&lp).unwrap());
        assert_eq!(p.objective, rat_int(4));
        assert_eq!(p.x[0], rat_int(1));
        assert_eq!(p.x[1], rat_int(4));
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LpInstance::new(1);
        lp.nonneg = vec![true];
        lp.add_row(vec![(0, rat_int(1))], Rel::Le, rat_int(1));
        lp.add_row(vec![(0, rat_int(1))], Rel::Ge, rat_int(2));
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LpInstance::new(1);
        lp.minimize = vec![rat_int(-1)];
        lp.nonneg = vec![true];
        lp.add_row(vec![(0, rat_int(1))], Rel::Ge, rat_int(0));
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn fractional_solution_is_exact() {
        // minimize x subject to 3x == 1.
        let mut lp = LpInstance::new(1);
        lp.minimize = vec![rat_int(1)];
        lp.nonneg = vec![true];
        lp.add_row(vec![(0, rat_int(3))], Rel::Eq, rat_int(1));
        let p = optimal(solve(&lp).unwrap());
        assert_eq!(p.objective, rat(1, 3));
    }

    #[test]
    fn negative_rhs_rows_work() {
        // minimize x subject to -x <= -5  (x >= 5)
        let mut lp = LpInstance::new(1);
        lp.minimize = vec![rat_int(1)];
        lp.nonneg = vec![true];
        lp.add_row(vec![(0, rat_int(-1))], Rel::Le, rat_int(-5));
        let p = optimal(solve(&lp).unwrap());
        assert_eq!(p.objective, rat_int(5));
        assert_eq!(p.row_duals[0], rat_int(-1));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut lp = LpInstance::new(2);
        lp.minimize = vec![rat_int(1), rat_int(2)];
        lp.nonneg = vec![true, true];
        lp.add_row(vec![(0, rat_int(1)), (1, rat_int(1))], Rel::Eq, rat_int(2));
        lp.add_row(vec![(0, rat_int(2)), (1, rat_int(2))], Rel::Eq, rat_int(4));
        lp.add_row(vec![(0, rat_int(1))], Rel::Ge, rat_int(0));
        let p = optimal(solve(&lp).unwrap());
        assert_eq!(p.objective, rat_int(2));
        assert_eq!(p.x, vec![rat_int(2), rat_int(0)]);
    }

    #[test]
    fn warm_start_reuses_basis_across_objectives() {
        let mut lp = LpInstance::new(2);
        lp.minimize = vec![rat_int(1), rat_int(1)];
        lp.nonneg = vec![true, true];
        lp.add_row(vec![(0, rat_int(1)), (1, rat_int(2))], Rel::Ge, rat_int(4));
        lp.add_row(vec![(0, rat_int(2)), (1, rat_int(1))], Rel::Ge, rat_int(4));
        let (first, state) = solve_with_warm(&lp, None).unwrap();
        let p1 = optimal(first);
        assert_eq!(p1.objective, rat(8, 3));
        let mut lp2 = lp.clone();
        lp2.minimize = vec![rat_int(3), rat_int(1)];
        let (second, state2) = solve_with_warm(&lp2, state.as_ref()).unwrap();
        let p2 = optimal(second);
        assert_eq!(p2.objective, rat_int(4));
        // Same constraint structure, so the stored basis must be accepted and
        // the resume must finish within a few pivots of the old vertex.
        assert_eq!(state2.unwrap().fingerprint, state.unwrap().fingerprint);
        assert!(p2.iterations <= 4);
    }

    #[test]
    fn rejects_bad_indices() {
        let mut lp = LpInstance::new(1);
        lp.add_row(vec![(3, rat_int(1))], Rel::Eq, rat_int(0));
        assert!(solve(&lp).is_err());
    }
}
