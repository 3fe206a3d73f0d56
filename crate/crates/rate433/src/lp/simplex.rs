//! Revised simplex core over exact rationals.
//!
//! Operates on a standardized problem: minimize over `Ax = b`, `x >= 0`,
//! `b >= 0`, with one artificial column per row. Dantzig pricing, falling back
//! to Bland's rule after a degenerate stretch so every run terminates.

use crate::error::{Error, Result};
use crate::rational::Rat;
use num::{One, Signed, Zero};

const ITERATION_LIMIT: u64 = 5_000_000;

/// Reusable optimal basis. Valid only for instances with the same constraint
/// structure; the objective may differ, which is what sweep warm starts need.
#[derive(Debug, Clone)]
pub struct WarmState {
    pub(crate) fingerprint: u64,
    pub(crate) basis: Vec<usize>,
    pub(crate) binv: Vec<Vec<Rat>>,
}

pub(crate) enum PhaseEnd {
    Optimal,
    Unbounded,
    /// The per-call pivot budget ran out before the phase settled.
    Budget,
}

#[derive(PartialEq)]
enum Mode {
    Dantzig,
    Bland,
}

pub(crate) struct Core<'a> {
    pub m: usize,
    pub n_struct: usize,
    /// Structural columns, sparse by row. Artificial `r` is the unit `e_r`.
    pub cols: &'a [Vec<(usize, Rat)>],
    pub binv: Vec<Vec<Rat>>,
    pub basis: Vec<usize>,
    pub xb: Vec<Rat>,
    in_basis: Vec<bool>,
    pub iterations: u64,
}

impl<'a> Core<'a> {
    pub fn artificial_start(cols: &'a [Vec<(usize, Rat)>], b: &'a [Rat]) -> Core<'a> {
        let m = b.len();
        let n_struct = cols.len();
        let mut binv = vec![vec![Rat::zero(); m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = Rat::one();
        }
        let basis: Vec<usize> = (0..m).map(|r| n_struct + r).collect();
        let mut in_basis = vec![false; n_struct + m];
        for &j in &basis {
            in_basis[j] = true;
        }
        Core { m, n_struct, cols, binv, basis, xb: b.to_vec(), in_basis, iterations: 0 }
    }

    /// Resumes from a stored basis. Fails when the basis is not primal
    /// feasible for `b` or parks an artificial at a nonzero level.
    pub fn from_warm(
        cols: &'a [Vec<(usize, Rat)>],
        b: &'a [Rat],
        basis: Vec<usize>,
        binv: Vec<Vec<Rat>>,
    ) -> Option<Core<'a>> {
        let m = b.len();
        let n_struct = cols.len();
        if basis.len() != m || binv.len() != m {
            return None;
        }
        let mut in_basis = vec![false; n_struct + m];
        for &j in &basis {
            if j >= n_struct + m || in_basis[j] {
                return None;
            }
            in_basis[j] = true;
        }
        let mut xb = Vec::with_capacity(m);
        for row in &binv {
            if row.len() != m {
                return None;
            }
            let mut v = Rat::zero();
            for (t, bt) in b.iter().enumerate() {
                if !row[t].is_zero() && !bt.is_zero() {
                    v += &row[t] * bt;
                }
            }
            xb.push(v);
        }
        for (r, v) in xb.iter().enumerate() {
            if v.is_negative() {
                return None;
            }
            if basis[r] >= n_struct && !v.is_zero() {
                return None;
            }
        }
        Some(Core { m, n_struct, cols, binv, basis, xb, in_basis, iterations: 0 })
    }

    /// Dual prices for the given cost model.
    pub fn y_vector(&self, structural_cost: Option<&[Rat]>) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); self.m];
        for i in 0..self.m {
            let j = self.basis[i];
            let cj: Rat = match structural_cost {
                Some(c) if j < self.n_struct => c[j].clone(),
                Some(_) => Rat::zero(),
                // Phase 1: artificials cost one, structure is free.
                None => {
                    if j < self.n_struct {
                        Rat::zero()
                    } else {
                        Rat::one()
                    }
                }
            };
            if cj.is_zero() {
                continue;
            }
            for t in 0..self.m {
                if !self.binv[i][t].is_zero() {
                    y[t] += &cj * &self.binv[i][t];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[Rat], j: usize, structural_cost: Option<&[Rat]>) -> Rat {
        let mut rc = match structural_cost {
            Some(c) => c[j].clone(),
            None => Rat::zero(),
        };
        for (row, val) in &self.cols[j] {
            if !y[*row].is_zero() {
                rc -= &y[*row] * val;
            }
        }
        rc
    }

    fn direction(&self, j: usize) -> Vec<Rat> {
        let mut u = vec![Rat::zero(); self.m];
        for (row, val) in &self.cols[j] {
            for i in 0..self.m {
                if !self.binv[i][*row].is_zero() {
                    u[i] += &self.binv[i][*row] * val;
                }
            }
        }
        u
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[Rat]) {
        let old = self.basis[r];
        self.in_basis[old] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
        let ur = u[r].clone();
        let theta = &self.xb[r] / &ur;
        for i in 0..self.m {
            if i != r && !u[i].is_zero() && !theta.is_zero() {
                self.xb[i] -= &theta * &u[i];
            }
        }
        self.xb[r] = theta;
        if !ur.is_one() {
            for t in 0..self.m {
                if !self.binv[r][t].is_zero() {
                    self.binv[r][t] /= &ur;
                }
            }
        }
        let prow = self.binv[r].clone();
        for i in 0..self.m {
            if i == r || u[i].is_zero() {
                continue;
            }
            for (t, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    self.binv[i][t] -= &u[i] * pv;
                }
            }
        }
    }

    /// One simplex phase. `structural_cost: None` means phase 1. A `budget`
    /// caps the pivots spent in this call so a caller holding a stale basis
    /// can bail out and restart instead of walking the whole path exactly.
    pub fn run_phase(
        &mut self,
        structural_cost: Option<&[Rat]>,
        budget: Option<u64>,
    ) -> Result<PhaseEnd> {
        let phase1 = structural_cost.is_none();
        let mut mode = Mode::Dantzig;
        let mut streak = 0u64;
        let mut spent = 0u64;
        let switch_at = 2 * self.m as u64 + 16;
        loop {
            self.iterations += 1;
            spent += 1;
            if self.iterations > ITERATION_LIMIT {
                return Err(Error::Domain("simplex iteration limit exceeded".into()));
            }
            if budget.is_some_and(|cap| spent > cap) {
                return Ok(PhaseEnd::Budget);
            }
            let y = self.y_vector(structural_cost);
            let mut enter: Option<usize> = None;
            let mut best_rc = Rat::zero();
            for j in 0..self.n_struct {
                if self.in_basis[j] {
                    continue;
                }
                let rc = self.reduced_cost(&y, j, structural_cost);
                if rc.is_negative() {
                    if mode == Mode::Bland {
                        enter = Some(j);
                        break;
                    }
                    if enter.is_none() || rc < best_rc {
                        best_rc = rc;
                        enter = Some(j);
                    }
                }
            }
            let Some(j) = enter else {
                return Ok(PhaseEnd::Optimal);
            };
            let u = self.direction(j);
            let mut leave: Option<usize> = None;
            if !phase1 {
                // A basic artificial must never climb off zero; pivot it out
                // the moment the entering column touches its row.
                for r in 0..self.m {
                    if self.basis[r] >= self.n_struct && !u[r].is_zero() {
                        leave = Some(r);
                        break;
                    }
                }
            }
            if leave.is_none() {
                let mut best: Option<usize> = None;
                for r in 0..self.m {
                    if !u[r].is_positive() {
                        continue;
                    }
                    match best {
                        None => best = Some(r),
                        Some(br) => {
                            // xb[r]/u[r] vs xb[br]/u[br] by cross multiplication.
                            let lhs = &self.xb[r] * &u[br];
                            let rhs = &self.xb[br] * &u[r];
                            if lhs < rhs || (lhs == rhs && self.basis[r] < self.basis[br]) {
                                best = Some(r);
                            }
                        }
                    }
                }
                leave = best;
            }
            let Some(r) = leave else {
                if phase1 {
                    return Err(Error::Domain("phase one cannot be unbounded".into()));
                }
                return Ok(PhaseEnd::Unbounded);
            };
            let degenerate = self.xb[r].is_zero();
            self.pivot(r, j, &u);
            if degenerate {
                streak += 1;
                if streak > switch_at {
                    mode = Mode::Bland;
                }
            } else {
                streak = 0;
                mode = Mode::Dantzig;
            }
        }
    }

    /// Value of the phase-1 objective: total artificial mass.
    pub fn artificial_mass(&self) -> Rat {
        let mut total = Rat::zero();
        for (r, &j) in self.basis.iter().enumerate() {
            if j >= self.n_struct {
                total += &self.xb[r];
            }
        }
        total
    }

    /// Swaps basic artificials for structural columns wherever the row allows
    /// it. Rows that admit no swap are linearly dependent and stay parked on
    /// their artificial at level zero.
    pub fn purge_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n_struct {
                continue;
            }
            debug_assert!(self.xb[r].is_zero());
            let mut found: Option<(usize, Vec<Rat>)> = None;
            for j in 0..self.n_struct {
                if self.in_basis[j] {
                    continue;
                }
                let mut ur = Rat::zero();
                for (row, val) in &self.cols[j] {
                    if !self.binv[r][*row].is_zero() {
                        ur += &self.binv[r][*row] * val;
                    }
                }
                if !ur.is_zero() {
                    found = Some((j, self.direction(j)));
                    break;
                }
            }
            if let Some((j, u)) = found {
                self.pivot(r, j, &u);
            }
        }
    }

    pub fn structural_values(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.n_struct];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n_struct {
                x[j] = self.xb[r].clone();
            }
        }
        x
    }
}

/// Exact inverse of the basis matrix whose columns are `basis` in order.
/// Column ids at or past `cols.len()` denote artificials, which are unit
/// columns. Returns `None` when the selection is singular.
pub(crate) fn invert_basis(
    cols: &[Vec<(usize, Rat)>],
    m: usize,
    basis: &[usize],
) -> Option<Vec<Vec<Rat>>> {
    if basis.len() != m {
        return None;
    }
    let n_struct = cols.len();
    let mut mat = vec![vec![Rat::zero(); m]; m];
    for (k, &j) in basis.iter().enumerate() {
        if j < n_struct {
            for (r, v) in &cols[j] {
                mat[*r][k] = v.clone();
            }
        } else {
            let r = j - n_struct;
            if r >= m {
                return None;
            }
            mat[r][k] = Rat::one();
        }
    }
    let mut inv = vec![vec![Rat::zero(); m]; m];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    for k in 0..m {
        let piv = (k..m).find(|&r| !mat[r][k].is_zero())?;
        mat.swap(k, piv);
        inv.swap(k, piv);
        let p = mat[k][k].clone();
        if !p.is_one() {
            for t in 0..m {
                if !mat[k][t].is_zero() {
                    mat[k][t] /= &p;
                }
                if !inv[k][t].is_zero() {
                    inv[k][t] /= &p;
                }
            }
        }
        let mrow = mat[k].clone();
        let irow = inv[k].clone();
        for r in 0..m {
            if r == k {
                continue;
            }
            let f = mat[r][k].clone();
            if f.is_zero() {
                continue;
            }
            for t in 0..m {
                if !mrow[t].is_zero() {
                    mat[r][t] -= &f * &mrow[t];
                }
                if !irow[t].is_zero() {
                    inv[r][t] -= &f * &irow[t];
                }
            }
        }
    }
    Some(inv)
}
