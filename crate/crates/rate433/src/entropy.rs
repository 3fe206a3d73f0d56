//! Random variables of the (4,3,3) repair problem.
//!
//! Sixteen joint random variables: four stored contents `W_1..W_4` and twelve
//! repair messages `S_{i,j}` (helper `i` sends to rebuild node `j`). Subsets
//! are 16-bit masks. Two structural rules close a subset under determinism,
//! and relabeling the four nodes acts on subsets; together they collapse the
//! 65535 nonempty subsets into 177 entropy classes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Number of joint random variables.
pub const NUM_VARS: u8 = 16;

const fn s_position(from: u8, to: u8) -> u8 {
    let skip = if to > from { 1 } else { 0 };
    4 + 3 * (from - 1) + (to - 1) - skip
}

const fn out_mask(node: u8) -> u16 {
    let mut m = 0u16;
    let mut j = 1u8;
    while j <= 4 {
        if j != node {
            m |= 1 << s_position(node, j);
        }
        j += 1;
    }
    m
}

const fn in_mask(node: u8) -> u16 {
    let mut m = 0u16;
    let mut i = 1u8;
    while i <= 4 {
        if i != node {
            m |= 1 << s_position(i, node);
        }
        i += 1;
    }
    m
}

// Messages sent by a node, and messages aimed at a node.
const OUT_MASKS: [u16; 4] = [out_mask(1), out_mask(2), out_mask(3), out_mask(4)];
const IN_MASKS: [u16; 4] = [in_mask(1), in_mask(2), in_mask(3), in_mask(4)];

/// A stored content `W_i` or a repair message `S_{i,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RandomVar {
    W(u8),
    S { from: u8, to: u8 },
}

impl RandomVar {
    pub fn w(node: u8) -> Result<Self> {
        if !(1..=4).contains(&node) {
            return Err(Error::InvalidVariable(format!("W_{node}")));
        }
        Ok(RandomVar::W(node))
    }

    pub fn s(from: u8, to: u8) -> Result<Self> {
        if !(1..=4).contains(&from) || !(1..=4).contains(&to) || from == to {
            return Err(Error::InvalidVariable(format!("S_{{{from},{to}}}")));
        }
        Ok(RandomVar::S { from, to })
    }

    /// Bit position in a subset mask. Contents sit at 0..4, messages follow in
    /// row-major sender order.
    pub fn position(self) -> u8 {
        match self {
            RandomVar::W(i) => i - 1,
            RandomVar::S { from, to } => s_position(from, to),
        }
    }

    pub fn from_position(pos: u8) -> Self {
        assert!(pos < 16, "position out of range");
        if pos < 4 {
            return RandomVar::W(pos + 1);
        }
        let k = pos - 4;
        let from = k / 3 + 1;
        let r = k % 3;
        let to = if r + 1 >= from { r + 2 } else { r + 1 };
        RandomVar::S { from, to }
    }

    /// Rendering with custom node labels, used by the proof renderer to show
    /// orbit families over symbolic indices.
    pub fn label(self, names: &[&str; 4]) -> String {
        match self {
            RandomVar::W(i) => format!("W_{}", names[(i - 1) as usize]),
            RandomVar::S { from, to } => format!(
                "S_{{{},{}}}",
                names[(from - 1) as usize],
                names[(to - 1) as usize]
            ),
        }
    }
}

impl fmt::Display for RandomVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label(&["1", "2", "3", "4"]))
    }
}

impl FromStr for RandomVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidVariable(s.to_string());
        let mut chars = t.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let rest: String = chars
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '{' && *c != '}' && *c != ',')
            .collect();
        let digits: Vec<u8> = rest
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect::<Result<_>>()?;
        match kind {
            'W' | 'w' if digits.len() == 1 => RandomVar::w(digits[0]),
            'S' | 's' if digits.len() == 2 => RandomVar::s(digits[0], digits[1]),
            _ => Err(bad()),
        }
    }
}

/// A subset of the sixteen variables, one bit per [`RandomVar::position`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RVSubset(pub u16);

impl RVSubset {
    pub const EMPTY: RVSubset = RVSubset(0);
    pub const FULL: RVSubset = RVSubset(u16::MAX);

    pub fn from_vars(vars: &[RandomVar]) -> Self {
        let mut m = 0u16;
        for v in vars {
            m |= 1 << v.position();
        }
        RVSubset(m)
    }

    pub fn singleton(v: RandomVar) -> Self {
        RVSubset(1 << v.position())
    }

    pub fn contains(self, v: RandomVar) -> bool {
        self.0 & (1 << v.position()) != 0
    }

    pub fn union(self, other: RVSubset) -> RVSubset {
        RVSubset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: RVSubset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn iter(self) -> impl Iterator<Item = RandomVar> {
        (0..16).filter(move |p| self.0 & (1 << p) != 0).map(RandomVar::from_position)
    }

    /// Bare comma-joined member list, ascending by position.
    pub fn list(self) -> String {
        self.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for RVSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.list())
    }
}

/// Splits at top-level occurrences of `sep`, ignoring separators inside braces.
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for RVSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = s.trim();
        // One outer brace pair is stripped when it spans the whole string.
        if t.starts_with('{') && t.ends_with('}') {
            let mut depth = 0i32;
            let mut spans_all = true;
            for (i, c) in t.char_indices() {
                if c == '{' {
                    depth += 1;
                } else if c == '}' {
                    depth -= 1;
                    if depth == 0 && i + 1 < t.len() {
                        spans_all = false;
                        break;
                    }
                }
            }
            if spans_all {
                t = t[1..t.len() - 1].trim();
            }
        }
        if t.is_empty() {
            return Ok(RVSubset::EMPTY);
        }
        let mut mask = 0u16;
        for part in split_top(t, ',') {
            let v: RandomVar = part.parse()?;
            mask |= 1 << v.position();
        }
        Ok(RVSubset(mask))
    }
}

/// Smallest superset closed under the two determinism rules: a stored content
/// determines the messages it sends, and the three messages aimed at a node
/// determine the rebuilt content.
pub fn closure(set: RVSubset) -> RVSubset {
    let mut m = set.0;
    loop {
        let mut next = m;
        for node in 0..4 {
            if next & (1 << node) != 0 {
                next |= OUT_MASKS[node];
            }
            if next & IN_MASKS[node] == IN_MASKS[node] {
                next |= 1 << node;
            }
        }
        if next == m {
            return RVSubset(m);
        }
        m = next;
    }
}

/// A relabeling of the four nodes; `map[i-1]` is the image of node `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodePermutation([u8; 4]);

impl NodePermutation {
    pub fn identity() -> Self {
        NodePermutation([1, 2, 3, 4])
    }

    pub fn new(map: [u8; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for &v in &map {
            if !(1..=4).contains(&v) || seen[(v - 1) as usize] {
                return Err(Error::Domain(format!("not a node permutation: {map:?}")));
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(NodePermutation(map))
    }

    /// All 24 relabelings in lexicographic order.
    pub fn all() -> Vec<NodePermutation> {
        let mut out = Vec::with_capacity(24);
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                for c in 1..=4u8 {
                    for d in 1..=4u8 {
                        if let Ok(p) = NodePermutation::new([a, b, c, d]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply_node(&self, node: u8) -> u8 {
        self.0[(node - 1) as usize]
    }

    pub fn apply_var(&self, v: RandomVar) -> RandomVar {
        match v {
            RandomVar::W(i) => RandomVar::W(self.apply_node(i)),
            RandomVar::S { from, to } => RandomVar::S {
                from: self.apply_node(from),
                to: self.apply_node(to),
            },
        }
    }

    /// Old bit position to new bit position.
    pub fn position_map(&self) -> [u8; 16] {
        let mut map = [0u8; 16];
        for pos in 0..16 {
            map[pos as usize] = self.apply_var(RandomVar::from_position(pos)).position();
        }
        map
    }

    pub fn apply_subset(&self, set: RVSubset) -> RVSubset {
        let map = self.position_map();
        let mut out = 0u16;
        for pos in 0..16 {
            if set.0 & (1 << pos) != 0 {
                out |= 1 << map[pos as usize];
            }
        }
        RVSubset(out)
    }
}

impl fmt::Display for NodePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {} {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

fn remap(mask: u16, map: &[u8; 16]) -> u16 {
    let mut out = 0u16;
    let mut rest = mask;
    while rest != 0 {
        let pos = rest.trailing_zeros() as usize;
        out |= 1 << map[pos];
        rest &= rest - 1;
    }
    out
}

/// Role a class plays in the linear programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pin {
    /// Ordinary entropy column.
    Free,
    /// Class of the closed full set; its value is the file size.
    B,
    /// Class of a single stored content; its value is the per-node storage.
    Alpha,
    /// Class of a single repair message; its value is the per-message bandwidth.
    Beta,
}

/// Partition of the nonempty subsets into entropy classes.
///
/// Two subsets share a class when their closures are related by a node
/// relabeling. A class is identified by the smallest mask among the 24 images
/// of the closure; ids are assigned in first-appearance order scanning masks
/// upward, so the table is fully deterministic.
pub struct ClassTable {
    class_of: Vec<u16>,
    reps: Vec<u16>,
    pins: Vec<Pin>,
    orbit_sizes: Vec<u32>,
}

impl ClassTable {
    pub fn build() -> ClassTable {
        let maps: Vec<[u8; 16]> =
            NodePermutation::all().iter().map(|p| p.position_map()).collect();
        let mut canon_memo = vec![0u16; 65536];
        let mut ids: HashMap<u16, u16> = HashMap::new();
        let mut class_of = vec![u16::MAX; 65536];
        let mut reps: Vec<u16> = Vec::new();
        let mut orbit_sizes: Vec<u32> = Vec::new();
        for mask in 1..=u16::MAX {
            let closed = closure(RVSubset(mask)).0;
            let mut canon = canon_memo[closed as usize];
            if canon == 0 {
                canon = u16::MAX;
                for map in &maps {
                    canon = canon.min(remap(closed, map));
                }
                canon_memo[closed as usize] = canon;
            }
            let next_id = reps.len() as u16;
            let id = *ids.entry(canon).or_insert_with(|| {
                reps.push(canon);
                orbit_sizes.push(0);
                next_id
            });
            class_of[mask as usize] = id;
            orbit_sizes[id as usize] += 1;
        }
        let mut pins = vec![Pin::Free; reps.len()];
        let b = class_of[RVSubset::FULL.0 as usize];
        let alpha = class_of[1];
        let beta = class_of[1 << s_position(1, 2) as usize];
        assert!(b != alpha && b != beta && alpha != beta, "pinned classes must be distinct");
        pins[b as usize] = Pin::B;
        pins[alpha as usize] = Pin::Alpha;
        pins[beta as usize] = Pin::Beta;
        ClassTable { class_of, reps, pins, orbit_sizes }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn free_count(&self) -> usize {
        self.pins.iter().filter(|p| **p == Pin::Free).count()
    }

    /// Class id of a nonempty subset.
    pub fn class_of(&self, set: RVSubset) -> u16 {
        assert!(!set.is_empty(), "the empty set has no class");
        self.class_of[set.0 as usize]
    }

    pub fn rep(&self, class: u16) -> u16 {
        self.reps[class as usize]
    }

    pub fn pin(&self, class: u16) -> Pin {
        self.pins[class as usize]
    }

    pub fn orbit_size(&self, class: u16) -> u32 {
        self.orbit_sizes[class as usize]
    }

    pub fn class_by_rep(&self, rep: u16) -> Option<u16> {
        self.reps.iter().position(|r| *r == rep).map(|i| i as u16)
    }

    pub fn b_class(&self) -> u16 {
        self.class_of(RVSubset::FULL)
    }

    pub fn alpha_class(&self) -> u16 {
        self.class_of(RVSubset(1))
    }

    pub fn beta_class(&self) -> u16 {
        self.class_of(RVSubset(1 << s_position(1, 2) as u16))
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            reps: self.reps.clone(),
            pins: self.pins.clone(),
            orbit_sizes: self.orbit_sizes.clone(),
        };
        serde_json::to_string_pretty(&file).expect("table serializes")
    }

    /// Loads a serialized table, rebuilding from scratch and refusing any
    /// mismatch so a stale file can never leak into a run.
    pub fn from_json_checked(s: &str) -> Result<ClassTable> {
        let file: TableFile = serde_json::from_str(s)?;
        let fresh = ClassTable::build();
        if file.reps != fresh.reps
            || file.pins != fresh.pins
            || file.orbit_sizes != fresh.orbit_sizes
        {
            return Err(Error::Decode("class table file disagrees with rebuild".into()));
        }
        Ok(fresh)
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    reps: Vec<u16>,
    pins: Vec<Pin>,
    orbit_sizes: Vec<u32>,
}

/// Entropy of every subset of the sixteen variables, in bits.
///
/// Produced by the concrete code constructions, where every entropy is an
/// integer rank, so values are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyVector {
    b_bits: u64,
    h: Vec<u64>,
}

impl EntropyVector {
    pub fn new(b_bits: u64, h: Vec<u64>) -> Result<Self> {
        if h.len() != 65536 {
            return Err(Error::Decode(format!("expected 65536 entropies, got {}", h.len())));
        }
        if h[0] != 0 {
            return Err(Error::Decode("empty set must have zero entropy".into()));
        }
        Ok(EntropyVector { b_bits, h })
    }

    pub fn b_bits(&self) -> u64 {
        self.b_bits
    }

    pub fn entropy(&self, set: RVSubset) -> u64 {
        self.h[set.0 as usize]
    }

    /// Every subset has the entropy of its closure.
    pub fn closure_consistent(&self) -> bool {
        (1..=u16::MAX).all(|m| self.h[m as usize] == self.h[closure(RVSubset(m)).0 as usize])
    }

    /// Entropy is invariant under all 24 node relabelings.
    pub fn fully_symmetric(&self) -> bool {
        let maps: Vec<[u8; 16]> =
            NodePermutation::all().iter().map(|p| p.position_map()).collect();
        (1..=u16::MAX)
            .all(|m| maps.iter().all(|map| self.h[m as usize] == self.h[remap(m, map) as usize]))
    }

    pub fn to_json(&self) -> String {
        let space = num::BigInt::from(1) << self.b_bits as usize;
        let file = VectorFile {
            b_bits: self.b_bits,
            message_space: space.to_string(),
            entropies: self.h.clone(),
        };
        serde_json::to_string(&file).expect("vector serializes")
    }

    pub fn from_json(s: &str) -> Result<EntropyVector> {
        let file: VectorFile = serde_json::from_str(s)?;
        EntropyVector::new(file.b_bits, file.entropies)
    }
}

#[derive(Serialize, Deserialize)]
struct VectorFile {
    b_bits: u64,
    // Number of messages, as a decimal string: 2^b_bits overflows u64 for the
    // symmetrized product codes.
    message_space: String,
    entropies: Vec<u64>,
}
