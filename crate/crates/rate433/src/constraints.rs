//! Information expressions, elemental inequalities, and the reduced system.
//!
//! Every elemental inequality over the sixteen variables is rewritten in terms
//! of entropy classes and deduplicated. The surviving rows are the complete
//! constraint set behind the tradeoff and certificate programs.

use crate::entropy::{
    split_top, ClassTable, EntropyVector, NodePermutation, Pin, RVSubset, RandomVar,
};
use crate::error::{Error, Result};
use crate::rational::{rat_string, Rat};
use num::{BigInt, One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

/// Column of the reduced system. `Class` carries the canonical representative
/// mask of a free class, so column names survive any reindexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    B,
    Alpha,
    Beta,
    Class(u16),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::B => write!(f, "B"),
            Var::Alpha => write!(f, "alpha"),
            Var::Beta => write!(f, "beta"),
            Var::Class(rep) => write!(f, "h{rep}"),
        }
    }
}

/// Sparse linear form over [`Var`] with exact coefficients. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    terms: BTreeMap<Var, Rat>,
}

impl LinearForm {
    pub fn new() -> Self {
        LinearForm::default()
    }

    pub fn add(&mut self, var: Var, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(var).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&var);
        }
    }

    pub fn add_scaled(&mut self, other: &LinearForm, k: &Rat) {
        for (var, c) in &other.terms {
            self.add(*var, c * k);
        }
    }

    pub fn coeff(&self, var: Var) -> Rat {
        self.terms.get(&var).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, value: impl Fn(Var) -> Rat) -> Rat {
        let mut sum = Rat::zero();
        for (var, c) in &self.terms {
            sum += c * value(*var);
        }
        sum
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (var, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let sign = c.is_negative();
            if idx == 0 {
                if sign {
                    write!(f, "-")?;
                }
            } else if sign {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !mag.is_one() {
                write!(f, "{} ", rat_string(&mag))?;
            }
            write!(f, "{var}")?;
        }
        Ok(())
    }
}

/// An entropy or conditional mutual information expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfoExpr {
    /// `H(left)` or `H(left|cond)`.
    Entropy { left: RVSubset, cond: RVSubset },
    /// `I(a;b)` or `I(a;b|cond)`.
    MutualInfo { a: RVSubset, b: RVSubset, cond: RVSubset },
}

impl InfoExpr {
    pub fn entropy(left: RVSubset, cond: RVSubset) -> Result<Self> {
        if left.is_empty() {
            return Err(Error::InvalidExpression {
                expr: format!("H({left}|{cond})"),
                reason: "empty entropy argument".into(),
            });
        }
        Ok(InfoExpr::Entropy { left, cond })
    }

    pub fn mutual(a: RVSubset, b: RVSubset, cond: RVSubset) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidExpression {
                expr: format!("I({a};{b}|{cond})"),
                reason: "empty mutual information argument".into(),
            });
        }
        Ok(InfoExpr::MutualInfo { a, b, cond })
    }

    pub fn apply_permutation(&self, p: &NodePermutation) -> InfoExpr {
        match self {
            InfoExpr::Entropy { left, cond } => InfoExpr::Entropy {
                left: p.apply_subset(*left),
                cond: p.apply_subset(*cond),
            },
            InfoExpr::MutualInfo { a, b, cond } => InfoExpr::MutualInfo {
                a: p.apply_subset(*a),
                b: p.apply_subset(*b),
                cond: p.apply_subset(*cond),
            },
        }
    }

    /// Signed joint-entropy terms; empty sets contribute nothing.
    pub fn joint_terms(&self) -> Vec<(RVSubset, i64)> {
        let raw = match self {
            InfoExpr::Entropy { left, cond } => {
                vec![(left.union(*cond), 1), (*cond, -1)]
            }
            InfoExpr::MutualInfo { a, b, cond } => vec![
                (a.union(*cond), 1),
                (b.union(*cond), 1),
                (a.union(*b).union(*cond), -1),
                (*cond, -1),
            ],
        };
        raw.into_iter().filter(|(s, _)| !s.is_empty()).collect()
    }

    /// Rewrites the expression over entropy classes, with the three pinned
    /// classes mapped to their named columns.
    pub fn reduce(&self, table: &ClassTable) -> LinearForm {
        let mut form = LinearForm::new();
        for (set, sign) in self.joint_terms() {
            let class = table.class_of(set);
            form.add(class_var(table, class), Rat::from_integer(BigInt::from(sign)));
        }
        form
    }

    pub fn label(&self, names: &[&str; 4]) -> String {
        let list = |s: RVSubset| {
            s.iter().map(|v| v.label(names)).collect::<Vec<_>>().join(",")
        };
        match self {
            InfoExpr::Entropy { left, cond } => {
                if cond.is_empty() {
                    format!("H({})", list(*left))
                } else {
                    format!("H({}|{})", list(*left), list(*cond))
                }
            }
            InfoExpr::MutualInfo { a, b, cond } => {
                if cond.is_empty() {
                    format!("I({};{})", list(*a), list(*b))
                } else {
                    format!("I({};{}|{})", list(*a), list(*b), list(*cond))
                }
            }
        }
    }
}

impl fmt::Display for InfoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label(&["1", "2", "3", "4"]))
    }
}

impl FromStr for InfoExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = |reason: &str| Error::InvalidExpression {
            expr: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, inner) = if (t.starts_with("H(") || t.starts_with("h(")) && t.ends_with(')') {
            ('H', &t[2..t.len() - 1])
        } else if (t.starts_with("I(") || t.starts_with("i(")) && t.ends_with(')') {
            ('I', &t[2..t.len() - 1])
        } else {
            return Err(bad("expected H(...) or I(...)"));
        };
        let by_bar = split_top(inner, '|');
        if by_bar.len() > 2 {
            return Err(bad("more than one conditioning bar"));
        }
        let cond: RVSubset =
            if by_bar.len() == 2 { by_bar[1].parse()? } else { RVSubset::EMPTY };
        match kind {
            'H' => InfoExpr::entropy(by_bar[0].parse()?, cond),
            _ => {
                let args = split_top(by_bar[0], ';');
                if args.len() != 2 {
                    return Err(bad("mutual information needs exactly two arguments"));
                }
                InfoExpr::mutual(args[0].parse()?, args[1].parse()?, cond)
            }
        }
    }
}

pub(crate) fn class_var(table: &ClassTable, class: u16) -> Var {
    match table.pin(class) {
        Pin::B => Var::B,
        Pin::Alpha => Var::Alpha,
        Pin::Beta => Var::Beta,
        Pin::Free => Var::Class(table.rep(class)),
    }
}

/// One elemental inequality over a ground set of `n <= 16` variables: either
/// `H(X_i | rest) >= 0` or `I(X_i ; X_j | X_K) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Elemental {
    pub i: u8,
    pub j: Option<u8>,
    pub cond: u16,
}

impl Elemental {
    pub fn expr(&self) -> InfoExpr {
        let bi = RVSubset(1 << self.i);
        match self.j {
            None => InfoExpr::Entropy { left: bi, cond: RVSubset(self.cond) },
            Some(j) => InfoExpr::MutualInfo {
                a: bi,
                b: RVSubset(1 << j),
                cond: RVSubset(self.cond),
            },
        }
    }

    /// Exact slack on an integer-valued entropy vector.
    pub fn slack(&self, v: &EntropyVector) -> i128 {
        let h = |m: u16| v.entropy(RVSubset(m)) as i128;
        let bi = 1u16 << self.i;
        match self.j {
            None => h(self.cond | bi) - h(self.cond),
            Some(j) => {
                let bj = 1u16 << j;
                h(self.cond | bi) + h(self.cond | bj) - h(self.cond | bi | bj) - h(self.cond)
            }
        }
    }
}

impl fmt::Display for Elemental {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr())
    }
}

/// All elemental inequalities for `n` variables: `n` monotonicities and
/// `C(n,2) * 2^(n-2)` submodularities, in that order.
pub fn gen_elemental(n: u8) -> Result<impl Iterator<Item = Elemental>> {
    if !(2..=16).contains(&n) {
        return Err(Error::Domain(format!("elemental ground set must have 2..=16 variables, got {n}")));
    }
    let full: u16 = if n == 16 { u16::MAX } else { (1u16 << n) - 1 };
    let mono = (0..n).map(move |i| Elemental { i, j: None, cond: full & !(1 << i) });
    let pairs = (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)));
    let subs = pairs.flat_map(move |(i, j)| {
        let others: Vec<u8> = (0..n).filter(|k| *k != i && *k != j).collect();
        (0u32..(1u32 << (n - 2))).map(move |bits| {
            let mut cond = 0u16;
            for (t, pos) in others.iter().enumerate() {
                if bits & (1 << t) != 0 {
                    cond |= 1 << pos;
                }
            }
            Elemental { i, j: Some(j), cond }
        })
    });
    Ok(mono.chain(subs))
}

/// First elemental inequality an entropy vector violates, if any.
pub fn first_elemental_violation(v: &EntropyVector) -> Option<Elemental> {
    gen_elemental(16).expect("16 is in range").find(|el| el.slack(v) < 0)
}

/// The problem's defining equalities: 12 message functions, 4 exact repairs,
/// 4 three-node recoveries, and the all-node recovery. Each reduces to the
/// zero form, which is exactly what the closure encodes.
pub fn problem_equalities() -> Vec<InfoExpr> {
    let mut out = Vec::with_capacity(21);
    let w = |i: u8| RVSubset::singleton(RandomVar::W(i));
    for i in 1..=4u8 {
        for j in 1..=4u8 {
            if i != j {
                let s = RVSubset::singleton(RandomVar::S { from: i, to: j });
                out.push(InfoExpr::Entropy { left: s, cond: w(i) });
            }
        }
    }
    for j in 1..=4u8 {
        let incoming = (1..=4u8)
            .filter(|i| *i != j)
            .fold(RVSubset::EMPTY, |acc, i| {
                acc.union(RVSubset::singleton(RandomVar::S { from: i, to: j }))
            });
        out.push(InfoExpr::Entropy { left: w(j), cond: incoming });
    }
    for skip in 1..=4u8 {
        let three = (1..=4u8)
            .filter(|i| *i != skip)
            .fold(RVSubset::EMPTY, |acc, i| acc.union(w(i)));
        out.push(InfoExpr::Entropy { left: RVSubset(!three.0), cond: three });
    }
    let all_w = RVSubset(0b1111);
    out.push(InfoExpr::Entropy { left: RVSubset(!all_w.0), cond: all_w });
    out
}

/// Entropy-valued columns and literature row count used in count reports.
pub const REFERENCE_TERMS: usize = 175;
pub const REFERENCE_COLUMNS: usize = 176;
pub const REFERENCE_ROWS: usize = 6152;

const PROVENANCE_KEEP: usize = 8;

/// One deduplicated inequality `form >= 0`, with the elementals it came from.
#[derive(Debug, Clone)]
pub struct ReducedRow {
    pub form: LinearForm,
    /// First few source elementals, in generation order.
    pub provenance: Vec<InfoExpr>,
    /// Total number of elementals that reduce to this row.
    pub merged: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemCounts {
    pub classes_total: usize,
    pub free_classes: usize,
    /// Entropy-valued columns of the normalized program: the free classes plus
    /// the storage class, which stays a column with a pinned value.
    pub entropy_terms: usize,
    /// Entropy terms plus the bandwidth variable.
    pub lp_columns: usize,
    pub elementals_in: u64,
    pub zero_reduced: u64,
    pub rows_out: usize,
}

/// The deduplicated elemental system over entropy classes.
pub struct ReducedSystem {
    pub table: ClassTable,
    pub rows: Vec<ReducedRow>,
    pub counts: SystemCounts,
}

fn reduce_elemental(table: &ClassTable, el: &Elemental) -> Vec<(u16, i8)> {
    let mut raw: [(u16, i8); 4] = [(0, 0); 4];
    let mut n = 0;
    let mut push = |mask: u16, coeff: i8| {
        if mask != 0 {
            raw[n] = (table.class_of(RVSubset(mask)), coeff);
            n += 1;
        }
    };
    let bi = 1u16 << el.i;
    match el.j {
        None => {
            push(el.cond | bi, 1);
            push(el.cond, -1);
        }
        Some(j) => {
            let bj = 1u16 << j;
            push(el.cond | bi, 1);
            push(el.cond | bj, 1);
            push(el.cond | bi | bj, -1);
            push(el.cond, -1);
        }
    }
    let mut terms = raw[..n].to_vec();
    terms.sort_unstable_by_key(|(c, _)| *c);
    let mut merged: Vec<(u16, i8)> = Vec::with_capacity(n);
    for (c, k) in terms {
        match merged.last_mut() {
            Some((lc, lk)) if *lc == c => *lk += k,
            _ => merged.push((c, k)),
        }
    }
    merged.retain(|(_, k)| *k != 0);
    merged
}

impl ReducedSystem {
    pub fn build() -> ReducedSystem {
        Self::build_with(ClassTable::build())
    }

    pub fn build_with(table: ClassTable) -> ReducedSystem {
        let mut index: HashMap<Vec<(u16, i8)>, usize> = HashMap::new();
        let mut keys: Vec<Vec<(u16, i8)>> = Vec::new();
        let mut sources: Vec<Vec<Elemental>> = Vec::new();
        let mut merged_counts: Vec<u64> = Vec::new();
        let mut elementals_in = 0u64;
        let mut zero_reduced = 0u64;
        for el in gen_elemental(16).expect("16 is in range") {
            elementals_in += 1;
            let key = reduce_elemental(&table, &el);
            if key.is_empty() {
                zero_reduced += 1;
                continue;
            }
            match index.get(&key) {
                Some(&at) => {
                    merged_counts[at] += 1;
                    if sources[at].len() < PROVENANCE_KEEP {
                        sources[at].push(el);
                    }
                }
                None => {
                    index.insert(key.clone(), keys.len());
                    keys.push(key);
                    sources.push(vec![el]);
                    merged_counts.push(1);
                }
            }
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_unstable_by(|a, b| keys[*a].cmp(&keys[*b]));
        let rows: Vec<ReducedRow> = order
            .iter()
            .map(|&at| {
                let mut form = LinearForm::new();
                for &(class, coeff) in &keys[at] {
                    form.add(class_var(&table, class), Rat::from_integer(BigInt::from(coeff)));
                }
                ReducedRow {
                    form,
                    provenance: sources[at].iter().map(|el| el.expr()).collect(),
                    merged: merged_counts[at],
                }
            })
            .collect();
        let counts = SystemCounts {
            classes_total: table.len(),
            free_classes: table.free_count(),
            entropy_terms: table.free_count() + 1,
            lp_columns: table.free_count() + 2,
            elementals_in,
            zero_reduced,
            rows_out: rows.len(),
        };
        ReducedSystem { table, rows, counts }
    }

    /// Column list in [`Var`] order: the three named columns, then free class
    /// representatives ascending.
    pub fn columns(&self) -> Vec<Var> {
        let mut cols = vec![Var::B, Var::Alpha, Var::Beta];
        let mut reps: Vec<u16> = (0..self.table.len() as u16)
            .filter(|c| self.table.pin(*c) == Pin::Free)
            .map(|c| self.table.rep(c))
            .collect();
        reps.sort_unstable();
        cols.extend(reps.into_iter().map(Var::Class));
        cols
    }

    /// Exact check of an integer entropy vector against every row. Row
    /// evaluation only makes sense for closure-consistent, fully symmetric
    /// vectors; otherwise the report carries zero satisfied rows.
    pub fn check_vector(&self, v: &EntropyVector) -> VectorReport {
        let closure_ok = v.closure_consistent();
        let symmetry_ok = v.fully_symmetric();
        let b = v.entropy(RVSubset::FULL);
        let alpha = v.entropy(RVSubset(1));
        let beta = v.entropy(RVSubset(1 << 4));
        let mut report = VectorReport {
            closure_ok,
            symmetry_ok,
            b,
            alpha,
            beta,
            rows: self.rows.len(),
            satisfied: 0,
            tight: 0,
            first_violation: None,
        };
        if !(closure_ok && symmetry_ok) {
            return report;
        }
        let value = |var: Var| -> Rat {
            let bits = match var {
                Var::B => b,
                Var::Alpha => alpha,
                Var::Beta => beta,
                Var::Class(rep) => v.entropy(RVSubset(rep)),
            };
            Rat::from_integer(BigInt::from(bits))
        };
        for (idx, row) in self.rows.iter().enumerate() {
            let slack = row.form.evaluate(&value);
            if slack.is_negative() {
                if report.first_violation.is_none() {
                    report.first_violation = Some(idx);
                }
            } else {
                report.satisfied += 1;
                if slack.is_zero() {
                    report.tight += 1;
                }
            }
        }
        report
    }

    pub fn to_json(&self) -> String {
        let columns: Vec<String> = self.columns().iter().map(|v| v.to_string()).collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut terms = serde_json::Map::new();
                for (var, c) in row.form.iter() {
                    terms.insert(var.to_string(), serde_json::Value::String(rat_string(c)));
                }
                serde_json::json!({
                    "terms": terms,
                    "provenance": row.provenance.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "merged": row.merged,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "counts": {
                "classes_total": self.counts.classes_total,
                "free_classes": self.counts.free_classes,
                "entropy_terms": self.counts.entropy_terms,
                "lp_columns": self.counts.lp_columns,
                "elementals_in": self.counts.elementals_in,
                "zero_reduced": self.counts.zero_reduced,
                "rows_out": self.counts.rows_out,
            },
            "columns": columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("system serializes")
    }

    /// Plain-text rendering, one inequality per line.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ deduplicated elemental system over entropy classes\n");
        for (idx, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("r{idx:04}: {} >= 0\n", row.form));
        }
        out
    }
}

/// Result of checking an entropy vector against the reduced system.
#[derive(Debug, Clone)]
pub struct VectorReport {
    pub closure_ok: bool,
    pub symmetry_ok: bool,
    pub b: u64,
    pub alpha: u64,
    pub beta: u64,
    pub rows: usize,
    pub satisfied: usize,
    pub tight: usize,
    pub first_violation: Option<usize>,
}

impl VectorReport {
    pub fn ok(&self) -> bool {
        self.closure_ok && self.symmetry_ok && self.satisfied == self.rows
    }
}
