//! Floating-point simplex used as a basis oracle.
//!
//! Nothing computed here is trusted. The caller re-derives every verdict in
//! exact arithmetic and falls back to the exact solver when a guess does not
//! survive that check, so this module only has to be fast and usually right.
//! The right-hand side is slightly perturbed to break the massive ties a
//! combinatorial right-hand side like `e1` produces; a wrong basis caused by
//! the perturbation is caught the same way as any float error.

use super::Standard;
use crate::rational::rat_to_f64;

const ENTER_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-6;
const CAP: u64 = 400_000;

pub(super) enum FloatVerdict {
    Optimal { basis: Vec<usize> },
    Unbounded { basis: Vec<usize> },
    Infeasible { basis: Vec<usize> },
    GaveUp,
}

enum End {
    Optimal,
    Unbounded,
}

struct FloatCore {
    m: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    binv: Vec<f64>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    in_basis: Vec<bool>,
    iters: u64,
}

impl FloatCore {
    fn new(std: &Standard, perturb: f64) -> FloatCore {
        let m = std.m;
        let n_struct = std.cols.len();
        let cols: Vec<Vec<(usize, f64)>> = std
            .cols
            .iter()
            .map(|c| c.iter().map(|(r, v)| (*r, rat_to_f64(v))).collect())
            .collect();
        let bmax = std.b.iter().map(|v| rat_to_f64(v).abs()).fold(0.0, f64::max);
        let b: Vec<f64> = std
            .b
            .iter()
            .enumerate()
            .map(|(r, v)| rat_to_f64(v) + perturb * (1.0 + bmax) * (r as f64 + 1.0))
            .collect();
        let cost = std.cost.iter().map(rat_to_f64).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let basis: Vec<usize> = (0..m).map(|r| n_struct + r).collect();
        let mut in_basis = vec![false; n_struct + m];
        for &j in &basis {
            in_basis[j] = true;
        }
        FloatCore { m, n_struct, cols, cost, binv, basis, xb: b, in_basis, iters: 0 }
    }

    fn prices(&self, phase1: bool) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for i in 0..self.m {
            let j = self.basis[i];
            let cj = if phase1 {
                if j >= self.n_struct {
                    1.0
                } else {
                    0.0
                }
            } else if j < self.n_struct {
                self.cost[j]
            } else {
                0.0
            };
            if cj != 0.0 {
                let row = &self.binv[i * self.m..(i + 1) * self.m];
                for (t, yt) in y.iter_mut().enumerate() {
                    *yt += cj * row[t];
                }
            }
        }
        y
    }

    fn run(&mut self, phase1: bool) -> Option<End> {
        let mut bland = false;
        let mut streak = 0u64;
        let switch_at = 4 * self.m as u64 + 32;
        loop {
            self.iters += 1;
            if self.iters > CAP {
                return None;
            }
            let y = self.prices(phase1);
            let mut enter: Option<usize> = None;
            let mut best = f64::INFINITY;
            for j in 0..self.n_struct {
                if self.in_basis[j] {
                    continue;
                }
                let mut rc = if phase1 { 0.0 } else { self.cost[j] };
                for &(r, v) in &self.cols[j] {
                    rc -= y[r] * v;
                }
                if rc < -ENTER_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(j);
                    }
                }
            }
            let Some(j) = enter else {
                return Some(End::Optimal);
            };
            let mut u = vec![0.0; self.m];
            for &(r, v) in &self.cols[j] {
                for i in 0..self.m {
                    u[i] += self.binv[i * self.m + r] * v;
                }
            }
            let mut leave: Option<usize> = None;
            if !phase1 {
                for r in 0..self.m {
                    if self.basis[r] >= self.n_struct && u[r].abs() > PIVOT_TOL {
                        leave = Some(r);
                        break;
                    }
                }
            }
            if leave.is_none() {
                let mut best_theta = f64::INFINITY;
                for r in 0..self.m {
                    if u[r] > PIVOT_TOL {
                        best_theta = best_theta.min(self.xb[r] / u[r]);
                    }
                }
                if best_theta.is_finite() {
                    let mut pick: Option<usize> = None;
                    for r in 0..self.m {
                        if u[r] > PIVOT_TOL && self.xb[r] / u[r] <= best_theta + 1e-10 {
                            match pick {
                                None => pick = Some(r),
                                Some(p) => {
                                    // Kick artificials out first, then lowest id.
                                    let better = (self.basis[r] >= self.n_struct
                                        && self.basis[p] < self.n_struct)
                                        || (self.basis[r] >= self.n_struct)
                                            == (self.basis[p] >= self.n_struct)
                                            && self.basis[r] < self.basis[p];
                                    if better {
                                        pick = Some(r);
                                    }
                                }
                            }
                        }
                    }
                    leave = pick;
                }
            }
            let Some(r) = leave else {
                return if phase1 { None } else { Some(End::Unbounded) };
            };
            let degenerate = self.xb[r].abs() < 1e-11;
            self.pivot(r, j, &u);
            if degenerate {
                streak += 1;
                if streak > switch_at {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[f64]) {
        self.in_basis[self.basis[r]] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
        let ur = u[r];
        let theta = self.xb[r] / ur;
        for i in 0..self.m {
            if i != r {
                self.xb[i] -= theta * u[i];
            }
        }
        self.xb[r] = theta;
        let (head, row_r, tail) = split_row(&mut self.binv, r, self.m);
        for v in row_r.iter_mut() {
            *v /= ur;
        }
        for (i, chunk) in head.chunks_mut(self.m).enumerate() {
            let f = u[i];
            if f != 0.0 {
                for (t, v) in chunk.iter_mut().enumerate() {
                    *v -= f * row_r[t];
                }
            }
        }
        for (off, chunk) in tail.chunks_mut(self.m).enumerate() {
            let f = u[r + 1 + off];
            if f != 0.0 {
                for (t, v) in chunk.iter_mut().enumerate() {
                    *v -= f * row_r[t];
                }
            }
        }
    }

    fn purge(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n_struct {
                continue;
            }
            let mut found: Option<usize> = None;
            for j in 0..self.n_struct {
                if self.in_basis[j] {
                    continue;
                }
                let mut ur = 0.0;
                for &(row, v) in &self.cols[j] {
                    ur += self.binv[r * self.m + row] * v;
                }
                if ur.abs() > 1e-7 {
                    found = Some(j);
                    break;
                }
            }
            if let Some(j) = found {
                let mut u = vec![0.0; self.m];
                for &(row, v) in &self.cols[j] {
                    for i in 0..self.m {
                        u[i] += self.binv[i * self.m + row] * v;
                    }
                }
                self.pivot(r, j, &u);
            }
        }
    }
}

fn split_row(binv: &mut [f64], r: usize, m: usize) -> (&mut [f64], &mut [f64], &mut [f64]) {
    let (head, rest) = binv.split_at_mut(r * m);
    let (row, tail) = rest.split_at_mut(m);
    (head, row, tail)
}

pub(super) fn solve_float(std: &Standard, perturb: f64) -> FloatVerdict {
    let mut core = FloatCore::new(std, perturb);
    match core.run(true) {
        None | Some(End::Unbounded) => return FloatVerdict::GaveUp,
        Some(End::Optimal) => {}
    }
    let mass: f64 = (0..core.m)
        .filter(|&r| core.basis[r] >= core.n_struct)
        .map(|r| core.xb[r])
        .sum();
    if mass > MASS_TOL {
        return FloatVerdict::Infeasible { basis: core.basis };
    }
    core.purge();
    match core.run(false) {
        None => FloatVerdict::GaveUp,
        Some(End::Optimal) => FloatVerdict::Optimal { basis: core.basis },
        Some(End::Unbounded) => FloatVerdict::Unbounded { basis: core.basis },
    }
}
