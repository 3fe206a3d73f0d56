//! The storage/bandwidth tradeoff curve.
//!
//! With the total message pinned to one unit and storage pinned to a value
//! `alpha`, the least feasible bandwidth is a linear program over the reduced
//! rows. We solve its dual: the dual's constraints do not depend on `alpha`,
//! only its objective does, so one factored basis carries a whole sweep.

use crate::constraints::{ReducedSystem, Var};
use crate::error::{Error, Result};
use crate::lp::{solve_with_warm, LpInstance, LpOutcome, Rel, WarmState};
use crate::proof::Facet;
use crate::rational::{rat, rat_string, rat_to_f64, Rat};
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Least bandwidth at one storage value. `beta` is `None` when no point of
/// the region has that storage.
#[derive(Debug, Clone)]
pub struct MinBeta {
    pub alpha: Rat,
    pub beta: Option<Rat>,
    pub iterations: u64,
}

struct RowCoeffs {
    cb: Rat,
    ca: Rat,
    cbeta: Rat,
}

/// Repeated minimum-bandwidth queries against one reduced system.
pub struct BetaSolver<'a> {
    sys: &'a ReducedSystem,
    coeffs: Vec<RowCoeffs>,
    free_index: BTreeMap<u16, usize>,
    instance: LpInstance,
    warm: Option<WarmState>,
}

impl<'a> BetaSolver<'a> {
    pub fn new(sys: &'a ReducedSystem) -> BetaSolver<'a> {
        let free_index: BTreeMap<u16, usize> = sys
            .columns()
            .iter()
            .filter_map(|v| match v {
                Var::Class(rep) => Some(*rep),
                _ => None,
            })
            .enumerate()
            .map(|(i, rep)| (rep, i))
            .collect();
        let n = sys.rows.len();
        let mut coeffs = Vec::with_capacity(n);
        let mut beta_row: Vec<(usize, Rat)> = Vec::new();
        let mut class_rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); free_index.len()];
        for (r, row) in sys.rows.iter().enumerate() {
            let mut rc = RowCoeffs { cb: Rat::zero(), ca: Rat::zero(), cbeta: Rat::zero() };
            for (var, c) in row.form.iter() {
                match var {
                    Var::B => rc.cb = c.clone(),
                    Var::Alpha => rc.ca = c.clone(),
                    Var::Beta => {
                        rc.cbeta = c.clone();
                        beta_row.push((r, c.clone()));
                    }
                    Var::Class(rep) => class_rows[free_index[rep]].push((r, c.clone())),
                }
            }
            coeffs.push(rc);
        }
        let mut instance = LpInstance::new(n);
        instance.nonneg = vec![true; n];
        instance.add_row(beta_row, Rel::Eq, Rat::one());
        for crow in class_rows {
            instance.add_row(crow, Rel::Eq, Rat::zero());
        }
        BetaSolver { sys, coeffs, free_index, instance, warm: None }
    }

    /// Exact least bandwidth at `alpha`. The answer is certified twice before
    /// returning: the recovered storage point satisfies every reduced row, and
    /// the multipliers reproduce its value by weak duality.
    pub fn min_beta(&mut self, alpha: &Rat) -> Result<MinBeta> {
        if alpha.is_negative() {
            return Err(Error::Domain("storage cannot be negative".into()));
        }
        for (r, rc) in self.coeffs.iter().enumerate() {
            self.instance.minimize[r] = &rc.cb + &rc.ca * alpha;
        }
        let (outcome, warm) = solve_with_warm(&self.instance, self.warm.as_ref())?;
        if warm.is_some() {
            self.warm = warm;
        }
        let point = match outcome {
            LpOutcome::Unbounded => {
                return Ok(MinBeta { alpha: alpha.clone(), beta: None, iterations: 0 });
            }
            LpOutcome::Infeasible => {
                unreachable!("scaling any feasible code keeps the multiplier system solvable")
            }
            LpOutcome::Optimal(p) => p,
        };
        let beta = -&point.objective;
        assert_eq!(beta, -&point.row_duals[0], "bandwidth dual disagrees with the objective");
        for row in &self.sys.rows {
            let mut value = Rat::zero();
            for (var, c) in row.form.iter() {
                match var {
                    Var::B => value += c,
                    Var::Alpha => value += c * alpha,
                    Var::Beta => value += c * &beta,
                    Var::Class(rep) => {
                        value -= c * &point.row_duals[1 + self.free_index[rep]];
                    }
                }
            }
            assert!(!value.is_negative(), "recovered point violates a reduced row");
        }
        let mut mass_beta = Rat::zero();
        let mut mass_obj = Rat::zero();
        let mut mass_class = vec![Rat::zero(); self.free_index.len()];
        for (r, lam) in point.x.iter().enumerate() {
            assert!(!lam.is_negative(), "multiplier sign");
            if lam.is_zero() {
                continue;
            }
            mass_beta += lam * &self.coeffs[r].cbeta;
            mass_obj += lam * &self.instance.minimize[r];
            for (var, c) in self.sys.rows[r].form.iter() {
                if let Var::Class(rep) = var {
                    mass_class[self.free_index[rep]] += lam * c;
                }
            }
        }
        assert!(mass_beta.is_one(), "multipliers must isolate the bandwidth column");
        assert!(mass_class.iter().all(Rat::is_zero), "multipliers must cancel every class");
        assert_eq!(mass_obj, point.objective, "weak duality mass mismatch");
        Ok(MinBeta { alpha: alpha.clone(), beta: Some(beta), iterations: point.iterations })
    }
}

/// Evenly spaced rationals from `from` to `to` inclusive.
pub fn grid(from: &Rat, to: &Rat, step: &Rat) -> Result<Vec<Rat>> {
    if !step.is_positive() {
        return Err(Error::Domain("grid step must be positive".into()));
    }
    if from > to {
        return Err(Error::Domain("grid start exceeds its end".into()));
    }
    let mut out = Vec::new();
    let mut x = from.clone();
    while &x <= to {
        out.push(x.clone());
        x += step;
        if out.len() > 100_000 {
            return Err(Error::Domain("grid would exceed 100000 points".into()));
        }
    }
    Ok(out)
}

/// Minimum bandwidth at each listed storage value. With `threads > 1` the
/// grid is split into contiguous chunks solved on a local thread pool; the
/// result order and values are identical either way.
pub fn sweep_curve(sys: &ReducedSystem, alphas: &[Rat], threads: usize) -> Result<Vec<MinBeta>> {
    if threads <= 1 || alphas.len() <= 1 {
        let mut solver = BetaSolver::new(sys);
        return alphas.iter().map(|a| solver.min_beta(a)).collect();
    }
    let chunk = alphas.len().div_ceil(threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let parts: Vec<Vec<MinBeta>> = pool.install(|| {
        alphas
            .par_chunks(chunk)
            .map(|span| {
                let mut solver = BetaSolver::new(sys);
                span.iter().map(|a| solver.min_beta(a)).collect::<Result<Vec<MinBeta>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Bandwidth floor implied by the four cut bounds alone, `None` when even
/// unbounded bandwidth cannot meet the storage value.
pub fn cutset_min_beta(alpha: &Rat) -> Option<Rat> {
    if alpha < &rat(1, 3) {
        return None;
    }
    let mut best = rat(1, 6);
    for cand in [Rat::one() - alpha * Rat::from_integer(2.into()), (Rat::one() - alpha) / Rat::from_integer(3.into())] {
        if cand > best {
            best = cand;
        }
    }
    Some(best)
}

/// The four cut bounds as facet lines.
pub fn cutset_reference_lines() -> Vec<Facet> {
    vec![
        Facet { a: 3, b: 0, c: 1 },
        Facet { a: 2, b: 1, c: 1 },
        Facet { a: 1, b: 3, c: 1 },
        Facet { a: 0, b: 6, c: 1 },
    ]
}

/// Supporting line through each consecutive pair of curve points, as a
/// primitive integer inequality satisfied above the curve. Runs of collinear
/// points collapse to one line; duplicate grid points determine no line; two
/// bandwidths at one storage value are rejected.
pub fn candidate_facets(points: &[MinBeta]) -> Result<Vec<Facet>> {
    if points.len() < 2 {
        return Err(Error::Domain("a supporting line needs at least two curve points".into()));
    }
    let feasible: Vec<(&Rat, &Rat)> =
        points.iter().filter_map(|p| p.beta.as_ref().map(|b| (&p.alpha, b))).collect();
    let mut out: Vec<Facet> = Vec::new();
    for pair in feasible.windows(2) {
        let (a1, b1) = pair[0];
        let (a2, b2) = pair[1];
        if a1 == a2 {
            if b1 == b2 {
                continue;
            }
            return Err(Error::Domain(format!(
                "two bandwidth values at storage {}",
                rat_string(a1)
            )));
        }
        let fa = b1 - b2;
        let fb = a2 - a1;
        let fc = &fa * a1 + &fb * b1;
        let facet = primitive_line(fa, fb, fc)?;
        if !out.contains(&facet) {
            out.push(facet);
        }
    }
    Ok(out)
}

/// Clears denominators, divides out the content, and orients the line so the
/// upper side of the curve satisfies `>=`.
fn primitive_line(a: Rat, b: Rat, c: Rat) -> Result<Facet> {
    let scale: BigInt = a.denom().lcm(b.denom()).lcm(c.denom());
    let mut ints: Vec<BigInt> =
        [&a, &b, &c].iter().map(|r| (*r * &scale).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !content.is_zero() {
        for v in &mut ints {
            *v = &*v / &content;
        }
    }
    if ints[1].is_negative() || (ints[1].is_zero() && ints[0].is_negative()) {
        for v in &mut ints {
            *v = -&*v;
        }
    }
    let small: Vec<i64> = ints
        .iter()
        .map(|v| v.to_i64().ok_or_else(|| Error::Domain("facet coefficients overflow".into())))
        .collect::<Result<_>>()?;
    Facet::new(small[0], small[1], small[2])
}

fn opt_rat_json(r: &Option<Rat>) -> serde_json::Value {
    match r {
        Some(v) => serde_json::Value::String(rat_string(v)),
        None => serde_json::Value::Null,
    }
}

fn facet_json(f: &Facet) -> serde_json::Value {
    serde_json::json!({ "alpha": f.a, "beta": f.b, "b": f.c, "display": f.to_string() })
}

/// Full sweep export: curve samples, detected supporting lines, and the four
/// cut reference lines. Infeasible grid points stay in the curve with a null
/// bandwidth so the grid alignment survives.
pub fn sweep_document(points: &[MinBeta], facets: &[Facet]) -> String {
    let rows: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            let cutset = cutset_min_beta(&p.alpha);
            serde_json::json!({
                "alpha": rat_string(&p.alpha),
                "beta": opt_rat_json(&p.beta),
                "cutset": opt_rat_json(&cutset),
                "feasible": p.beta.is_some(),
                "alpha_approx": rat_to_f64(&p.alpha),
                "beta_approx": p.beta.as_ref().map(rat_to_f64),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "points": rows,
        "candidate_facets": facets.iter().map(facet_json).collect::<Vec<_>>(),
        "reference_lines": cutset_reference_lines().iter().map(facet_json).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("curve serializes")
}

/// Curve samples as CSV with exact values and decimal approximations.
/// Infeasible points carry an INFEASIBLE marker in the bandwidth column.
pub fn curve_csv(points: &[MinBeta]) -> String {
    let mut out = String::from("alpha,beta,cutset,alpha_approx,beta_approx\n");
    for p in points {
        let cutset = cutset_min_beta(&p.alpha);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rat_string(&p.alpha),
            p.beta.as_ref().map(rat_string).unwrap_or_else(|| "INFEASIBLE".into()),
            cutset.as_ref().map(rat_string).unwrap_or_else(|| "INFEASIBLE".into()),
            rat_to_f64(&p.alpha),
            p.beta.as_ref().map(|b| rat_to_f64(b).to_string()).unwrap_or_default()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    #[test]
    fn grid_is_inclusive_and_exact() {
        let g = grid(&rat(1, 3), &rat(1, 2), &rat(1, 12)).unwrap();
        assert_eq!(g, vec![rat(1, 3), rat(5, 12), rat(1, 2)]);
        assert!(grid(&rat(1, 2), &rat(1, 3), &rat(1, 12)).is_err());
        assert!(grid(&rat(1, 3), &rat(1, 2), &rat_int(0)).is_err());
    }

    #[test]
    fn cutset_floor_matches_piecewise_form() {
        assert_eq!(cutset_min_beta(&rat(1, 4)), None);
        assert_eq!(cutset_min_beta(&rat(1, 3)), Some(rat(1, 3)));
        assert_eq!(cutset_min_beta(&rat(3, 8)), Some(rat(1, 4)));
        assert_eq!(cutset_min_beta(&rat(2, 5)), Some(rat(1, 5)));
        assert_eq!(cutset_min_beta(&rat(5, 12)), Some(rat(7, 36)));
        assert_eq!(cutset_min_beta(&rat(1, 2)), Some(rat(1, 6)));
        assert_eq!(cutset_min_beta(&rat_int(7)), Some(rat(1, 6)));
    }

    #[test]
    fn segment_lines_are_primitive_and_oriented() {
        let mk = |a: Rat, b: Rat| MinBeta { alpha: a, beta: Some(b), iterations: 0 };
        let points = vec![
            mk(rat(1, 3), rat(1, 3)),
            mk(rat(3, 8), rat(1, 4)),
            mk(rat(3, 8), rat(1, 4)),
            mk(rat(1, 2), rat(1, 6)),
        ];
        let facets = candidate_facets(&points).unwrap();
        assert_eq!(facets, vec![Facet { a: 2, b: 1, c: 1 }, Facet { a: 4, b: 6, c: 3 }]);
    }

    #[test]
    fn conflicting_bandwidths_at_one_storage_are_rejected() {
        let points = vec![
            MinBeta { alpha: rat(1, 3), beta: Some(rat(1, 3)), iterations: 0 },
            MinBeta { alpha: rat(1, 3), beta: Some(rat(1, 4)), iterations: 0 },
        ];
        assert!(candidate_facets(&points).is_err());
    }

    #[test]
    fn infeasible_points_are_skipped_in_lines() {
        let points = vec![
            MinBeta { alpha: rat(1, 4), beta: None, iterations: 0 },
            MinBeta { alpha: rat(1, 3), beta: Some(rat(1, 3)), iterations: 0 },
            MinBeta { alpha: rat(1, 2), beta: Some(rat(1, 6)), iterations: 0 },
        ];
        let facets = candidate_facets(&points).unwrap();
        assert_eq!(facets, vec![Facet { a: 3, b: 3, c: 2 }]);
    }

    #[test]
    fn exports_carry_exact_strings_and_mark_infeasible_points() {
        let points = vec![
            MinBeta { alpha: rat(1, 4), beta: None, iterations: 0 },
            MinBeta { alpha: rat(5, 12), beta: Some(rat(2, 9)), iterations: 5 },
        ];
        let csv = curve_csv(&points);
        assert!(csv.contains("1/4,INFEASIBLE,INFEASIBLE,0.25,\n"));
        assert!(csv.contains("5/12,2/9,7/36,"));
        let json = sweep_document(&points, &[Facet { a: 4, b: 6, c: 3 }]);
        assert!(json.contains("\"beta\": null"));
        assert!(json.contains("\"beta\": \"2/9\""));
        assert!(json.contains("\"display\": \"4 alpha + 6 beta >= 3 B\""));
        assert!(json.contains("\"display\": \"6 beta >= B\""));
    }

    #[test]
    fn too_few_points_for_a_line_is_an_error() {
        let one = vec![MinBeta { alpha: rat(1, 3), beta: Some(rat(1, 3)), iterations: 0 }];
        assert!(candidate_facets(&one).is_err());
    }
}
