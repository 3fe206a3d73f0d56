//! Concrete corner-point codes over GF(2).
//!
//! A code here is fully determined by its encoding side: what each node
//! stores and which parities a helper sends. The repair and reconstruction
//! tables are not inputs, they are derived at construction by solving linear
//! systems, so a code that constructs at all is decodable by design and
//! `verify` exercises the derived tables bit for bit.

use crate::entropy::{EntropyVector, NodePermutation, RVSubset, RandomVar};
use crate::error::{Error, Result};
use crate::rational::{rat, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// The three named constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeId {
    Msr,
    Mbr,
    Interior,
}

impl CodeId {
    /// Normalized (storage, bandwidth) the construction is designed to hit.
    pub fn point(&self) -> (Rat, Rat) {
        match self {
            CodeId::Msr => (rat(1, 3), rat(1, 3)),
            CodeId::Mbr => (rat(1, 2), rat(1, 6)),
            CodeId::Interior => (rat(3, 8), rat(1, 4)),
        }
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeId::Msr => "msr",
            CodeId::Mbr => "mbr",
            CodeId::Interior => "interior",
        })
    }
}

impl FromStr for CodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<CodeId> {
        match s.to_ascii_lowercase().as_str() {
            "msr" => Ok(CodeId::Msr),
            "mbr" => Ok(CodeId::Mbr),
            "interior" => Ok(CodeId::Interior),
            other => Err(Error::Domain(format!("unknown code {other:?}, expected msr, mbr or interior"))),
        }
    }
}

fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

/// GF(2) elimination with combination tracking. Returns, for each target,
/// the subset of input rows that sums to it, or `None` if any target is
/// outside the row span.
fn solve_gf2(rows: &[u32], targets: &[u32]) -> Option<Vec<u32>> {
    assert!(rows.len() <= 32, "combination masks are 32 bits");
    let mut basis = [(0u32, 0u32); 32];
    for (i, &row) in rows.iter().enumerate() {
        let mut r = row;
        let mut c = 1u32 << i;
        while r != 0 {
            let h = (31 - r.leading_zeros()) as usize;
            if basis[h].0 == 0 {
                basis[h] = (r, c);
                break;
            }
            r ^= basis[h].0;
            c ^= basis[h].1;
        }
    }
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let mut r = t;
        let mut c = 0u32;
        while r != 0 {
            let h = (31 - r.leading_zeros()) as usize;
            if basis[h].0 == 0 {
                return None;
            }
            r ^= basis[h].0;
            c ^= basis[h].1;
        }
        out.push(c);
    }
    Some(out)
}

fn rank_gf2(rows: impl IntoIterator<Item = u32>) -> u32 {
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for mut r in rows {
        while r != 0 {
            let h = (31 - r.leading_zeros()) as usize;
            if basis[h] == 0 {
                basis[h] = r;
                rank += 1;
                break;
            }
            r ^= basis[h];
        }
    }
    rank
}

/// Binary linear storage code. Every stored bit and every repair message is a
/// parity of the message bits; masks in `node_rows` select message bits and
/// masks in `send` select the helper's stored bits.
#[derive(Debug, Clone)]
pub struct LinearCode {
    b_bits: u32,
    node_rows: [Vec<u32>; 4],
    send: [[Vec<u32>; 4]; 4],
    /// Per stored bit of node j: parity mask over its received repair bits.
    repair_take: [Vec<u32>; 4],
    /// Per message bit: parity mask over the concatenated stored bits of the
    /// three nodes other than the skipped one.
    reconstruct: [Vec<u32>; 4],
}

impl LinearCode {
    pub fn new(b_bits: u32, node_rows: [Vec<u32>; 4], send: [[Vec<u32>; 4]; 4]) -> Result<LinearCode> {
        if b_bits == 0 || b_bits > 24 {
            return Err(Error::Domain("message size must be 1 to 24 bits".into()));
        }
        let msg_mask = (1u32 << b_bits) - 1;
        for (i, rows) in node_rows.iter().enumerate() {
            if rows.is_empty() || rows.len() > 10 {
                return Err(Error::Domain(format!("node {} must store 1 to 10 bits", i + 1)));
            }
            if rows.iter().any(|&r| r & !msg_mask != 0) {
                return Err(Error::Domain(format!("node {} row selects missing message bits", i + 1)));
            }
            for (j, masks) in send[i].iter().enumerate() {
                if i == j {
                    if !masks.is_empty() {
                        return Err(Error::Domain("a node does not message itself".into()));
                    }
                    continue;
                }
                let content_mask = (1u32 << rows.len()) - 1;
                if masks.iter().any(|&m| m & !content_mask != 0) {
                    return Err(Error::Domain(format!(
                        "message from node {} to node {} selects missing stored bits",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut repair_take: [Vec<u32>; 4] = Default::default();
        for j in 0..4 {
            let mut rows: Vec<u32> = Vec::new();
            for i in 0..4 {
                if i == j {
                    continue;
                }
                for &mask in &send[i][j] {
                    let mut row = 0u32;
                    for (k, &nr) in node_rows[i].iter().enumerate() {
                        if mask & (1 << k) != 0 {
                            row ^= nr;
                        }
                    }
                    rows.push(row);
                }
            }
            if rows.len() > 32 {
                return Err(Error::Domain("too many repair bits to track".into()));
            }
            repair_take[j] = solve_gf2(&rows, &node_rows[j]).ok_or_else(|| {
                Error::Domain(format!("node {} cannot be rebuilt from its incoming messages", j + 1))
            })?;
        }
        let mut reconstruct: [Vec<u32>; 4] = Default::default();
        let targets: Vec<u32> = (0..b_bits).map(|bit| 1u32 << bit).collect();
        for skip in 0..4 {
            let mut rows: Vec<u32> = Vec::new();
            for (t, tr) in node_rows.iter().enumerate() {
                if t != skip {
                    rows.extend(tr.iter().copied());
                }
            }
            if rows.len() > 32 {
                return Err(Error::Domain("too many stored bits to track".into()));
            }
            reconstruct[skip] = solve_gf2(&rows, &targets).ok_or_else(|| {
                Error::Domain(format!("message is not recoverable without node {}", skip + 1))
            })?;
        }
        Ok(LinearCode { b_bits, node_rows, send, repair_take, reconstruct })
    }

    pub fn b_bits(&self) -> u32 {
        self.b_bits
    }

    /// Largest per-node storage, in bits.
    pub fn alpha_bits(&self) -> u32 {
        self.node_rows.iter().map(Vec::len).max().unwrap() as u32
    }

    /// Largest per-message repair transfer, in bits.
    pub fn beta_bits(&self) -> u32 {
        self.send.iter().flatten().map(Vec::len).max().unwrap() as u32
    }

    pub fn encode(&self, msg: u32) -> [u32; 4] {
        std::array::from_fn(|i| {
            let mut content = 0u32;
            for (k, &row) in self.node_rows[i].iter().enumerate() {
                content |= parity(msg & row) << k;
            }
            content
        })
    }

    fn received_bits(&self, contents: &[u32; 4], j: usize) -> u32 {
        let mut received = 0u32;
        let mut pos = 0;
        for i in 0..4 {
            if i == j {
                continue;
            }
            for &mask in &self.send[i][j] {
                received |= parity(contents[i] & mask) << pos;
                pos += 1;
            }
        }
        received
    }

    fn check_message(&self, msg: u32) -> Result<()> {
        let contents = self.encode(msg);
        for j in 0..4 {
            let received = self.received_bits(&contents, j);
            let mut rebuilt = 0u32;
            for (k, &take) in self.repair_take[j].iter().enumerate() {
                rebuilt |= parity(received & take) << k;
            }
            if rebuilt != contents[j] {
                return Err(Error::Decode(format!(
                    "repair of node {} fails on message {:#x}",
                    j + 1,
                    msg
                )));
            }
        }
        for skip in 0..4 {
            let mut concat = 0u32;
            let mut pos = 0;
            for t in 0..4 {
                if t == skip {
                    continue;
                }
                concat |= contents[t] << pos;
                pos += self.node_rows[t].len();
            }
            let mut decoded = 0u32;
            for (bit, &take) in self.reconstruct[skip].iter().enumerate() {
                decoded |= parity(concat & take) << bit;
            }
            if decoded != msg {
                return Err(Error::Decode(format!(
                    "reconstruction without node {} fails on message {:#x}",
                    skip + 1,
                    msg
                )));
            }
        }
        Ok(())
    }

    /// Copy with one stored parity changed after the decode tables were
    /// derived. The tables go stale on purpose: the copy is a fault-injection
    /// target for the verifier.
    pub fn with_encode_bit_flipped(&self, node: usize, row: usize, bit: u32) -> LinearCode {
        assert!(node < 4 && row < self.node_rows[node].len() && bit < self.b_bits);
        let mut out = self.clone();
        out.node_rows[node][row] ^= 1 << bit;
        out
    }

    /// Joint entropies (in bits) of every subset of the sixteen variables, by
    /// GF(2) rank of the corresponding parity rows.
    pub fn entropy_vector(&self) -> EntropyVector {
        let mut var_rows: Vec<Vec<u32>> = Vec::with_capacity(16);
        for pos in 0..16u8 {
            let rows = match RandomVar::from_position(pos) {
                RandomVar::W(i) => self.node_rows[(i - 1) as usize].clone(),
                RandomVar::S { from, to } => {
                    let stored = &self.node_rows[(from - 1) as usize];
                    self.send[(from - 1) as usize][(to - 1) as usize]
                        .iter()
                        .map(|&mask| {
                            let mut row = 0u32;
                            for (k, &nr) in stored.iter().enumerate() {
                                if mask & (1 << k) != 0 {
                                    row ^= nr;
                                }
                            }
                            row
                        })
                        .collect()
                }
            };
            var_rows.push(rows);
        }
        let mut h = vec![0u64; 1 << 16];
        for mask in 1u32..(1 << 16) {
            let members = (0..16).filter(|p| mask & (1 << p) != 0);
            let rows = members.flat_map(|p| var_rows[p as usize].iter().copied());
            h[mask as usize] = rank_gf2(rows) as u64;
        }
        EntropyVector::new(self.b_bits as u64, h).expect("rank vector is well formed")
    }
}

/// Verification policy: every message, or a seeded random sample.
#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

/// Work done by a successful verification.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyStats {
    pub messages: u64,
    pub repairs: u64,
    pub reconstructions: u64,
}

/// A single code or an independent product of codes. A product stores and
/// repairs componentwise, so its entropies are the sums of its factors'.
#[derive(Debug, Clone)]
pub enum ConcreteCode {
    Linear(LinearCode),
    Product(Vec<LinearCode>),
}

impl ConcreteCode {
    pub fn b_bits(&self) -> u64 {
        match self {
            ConcreteCode::Linear(c) => c.b_bits() as u64,
            ConcreteCode::Product(fs) => fs.iter().map(|c| c.b_bits() as u64).sum(),
        }
    }

    pub fn alpha_bits(&self) -> u64 {
        match self {
            ConcreteCode::Linear(c) => c.alpha_bits() as u64,
            ConcreteCode::Product(fs) => fs.iter().map(|c| c.alpha_bits() as u64).sum(),
        }
    }

    pub fn beta_bits(&self) -> u64 {
        match self {
            ConcreteCode::Linear(c) => c.beta_bits() as u64,
            ConcreteCode::Product(fs) => fs.iter().map(|c| c.beta_bits() as u64).sum(),
        }
    }

    /// Normalized (storage, bandwidth) per message bit.
    pub fn normalized_point(&self) -> (Rat, Rat) {
        let b = self.b_bits() as i64;
        (rat(self.alpha_bits() as i64, b), rat(self.beta_bits() as i64, b))
    }

    /// Checks repair of every node and reconstruction from every triple.
    /// Exhaustive mode runs factor by factor, which covers the product
    /// exactly because factors never interact; sampled mode draws joint
    /// messages.
    pub fn verify(&self, mode: VerifyMode) -> Result<VerifyStats> {
        let mut stats = VerifyStats::default();
        match (self, mode) {
            (ConcreteCode::Linear(c), VerifyMode::Exhaustive) => {
                for msg in 0..1u64 << c.b_bits() {
                    c.check_message(msg as u32)?;
                    stats.messages += 1;
                    stats.repairs += 4;
                    stats.reconstructions += 4;
                }
            }
            (ConcreteCode::Linear(c), VerifyMode::Sampled { seed, samples }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mask = (1u32 << c.b_bits()) - 1;
                for _ in 0..samples {
                    c.check_message(rng.gen::<u32>() & mask)?;
                    stats.messages += 1;
                    stats.repairs += 4;
                    stats.reconstructions += 4;
                }
            }
            (ConcreteCode::Product(fs), VerifyMode::Exhaustive) => {
                for f in fs {
                    let sub = ConcreteCode::Linear(f.clone()).verify(VerifyMode::Exhaustive)?;
                    stats.messages += sub.messages;
                    stats.repairs += sub.repairs;
                    stats.reconstructions += sub.reconstructions;
                }
            }
            (ConcreteCode::Product(fs), VerifyMode::Sampled { seed, samples }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    for f in fs {
                        let mask = (1u32 << f.b_bits()) - 1;
                        f.check_message(rng.gen::<u32>() & mask)?;
                    }
                    stats.messages += 1;
                    stats.repairs += 4;
                    stats.reconstructions += 4;
                }
            }
        }
        Ok(stats)
    }

    pub fn entropy_vector(&self) -> EntropyVector {
        match self {
            ConcreteCode::Linear(c) => c.entropy_vector(),
            ConcreteCode::Product(fs) => {
                let mut h = vec![0u64; 1 << 16];
                let mut b = 0u64;
                for f in fs {
                    let v = f.entropy_vector();
                    for (m, acc) in h.iter_mut().enumerate() {
                        *acc += v.entropy(RVSubset(m as u16));
                    }
                    b += v.b_bits();
                }
                EntropyVector::new(b, h).expect("sum of rank vectors is well formed")
            }
        }
    }
}

fn relabel(code: &LinearCode, p: &NodePermutation) -> LinearCode {
    let src = |i: usize| (p.apply_node((i + 1) as u8) - 1) as usize;
    let node_rows = std::array::from_fn(|i| code.node_rows[src(i)].clone());
    let send = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { Vec::new() } else { code.send[src(i)][src(j)].clone() })
    });
    LinearCode::new(code.b_bits, node_rows, send).expect("relabeled code stays decodable")
}

/// Product of the 24 relabeled copies. Its entropies are orbit sums, so the
/// result is symmetric under every relabeling while sitting at the same
/// normalized point.
pub fn symmetrize(code: &LinearCode) -> ConcreteCode {
    ConcreteCode::Product(NodePermutation::all().iter().map(|p| relabel(code, p)).collect())
}

/// The frozen constructions.
pub fn build_code(id: CodeId) -> LinearCode {
    match id {
        CodeId::Msr => {
            // Three message bits: three systematic nodes and one parity node,
            // each helper forwarding its single stored bit.
            let node_rows = [vec![0b001], vec![0b010], vec![0b100], vec![0b111]];
            let send = std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { Vec::new() } else { vec![0b1] })
            });
            LinearCode::new(3, node_rows, send).expect("construction is decodable")
        }
        CodeId::Mbr => {
            // One message bit per node pair; a node stores its three pair
            // bits and forwards the bit it shares with the failed node.
            let pair_index = |a: usize, b: usize| -> usize {
                match (a.min(b), a.max(b)) {
                    (1, 2) => 0,
                    (1, 3) => 1,
                    (1, 4) => 2,
                    (2, 3) => 3,
                    (2, 4) => 4,
                    _ => 5,
                }
            };
            let pairs_of = |i: usize| -> Vec<usize> {
                let mut ps: Vec<usize> =
                    (1..=4).filter(|&o| o != i).map(|o| pair_index(i, o)).collect();
                ps.sort_unstable();
                ps
            };
            let node_rows = std::array::from_fn(|i| {
                pairs_of(i + 1).iter().map(|&p| 1u32 << p).collect()
            });
            let send = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    if i == j {
                        return Vec::new();
                    }
                    let shared = pair_index(i + 1, j + 1);
                    let at = pairs_of(i + 1).iter().position(|&p| p == shared).unwrap();
                    vec![1u32 << at]
                })
            });
            LinearCode::new(6, node_rows, send).expect("construction is decodable")
        }
        CodeId::Interior => {
            // Eight message bits; each node stores two systematic bits and
            // one four-bit parity. Helpers answer with two parities of their
            // three stored bits, chosen by the cyclic distance to the failed
            // node.
            let node_rows = [
                vec![0x01, 0x02, 0xE4],
                vec![0x04, 0x08, 0x93],
                vec![0x10, 0x20, 0x4E],
                vec![0x40, 0x80, 0x39],
            ];
            let send = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    if i == j {
                        return Vec::new();
                    }
                    match (j + 4 - i) % 4 {
                        1 => vec![0b011, 0b110],
                        2 => vec![0b010, 0b111],
                        _ => vec![0b001, 0b111],
                    }
                })
            });
            LinearCode::new(8, node_rows, send).expect("construction is decodable")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::RVSubset;

    #[test]
    fn all_three_codes_verify_exhaustively() {
        for (id, b, alpha, beta) in
            [(CodeId::Msr, 3, 1, 1), (CodeId::Mbr, 6, 3, 1), (CodeId::Interior, 8, 3, 2)]
        {
            let code = ConcreteCode::Linear(build_code(id));
            assert_eq!(code.b_bits(), b, "{id}");
            assert_eq!(code.alpha_bits(), alpha, "{id}");
            assert_eq!(code.beta_bits(), beta, "{id}");
            assert_eq!(code.normalized_point(), CodeId::point(&id), "{id}");
            let stats = code.verify(VerifyMode::Exhaustive).unwrap();
            assert_eq!(stats.messages, 1 << b);
            assert_eq!(stats.repairs, 4 << b);
            assert_eq!(stats.reconstructions, 4 << b);
        }
    }

    #[test]
    fn any_single_encode_fault_is_caught() {
        let code = build_code(CodeId::Interior);
        for node in 0..4 {
            for row in 0..3 {
                for bit in 0..8 {
                    let broken = ConcreteCode::Linear(code.with_encode_bit_flipped(node, row, bit));
                    assert!(
                        broken.verify(VerifyMode::Exhaustive).is_err(),
                        "flip {node}/{row}/{bit} went unnoticed"
                    );
                }
            }
        }
    }

    #[test]
    fn interior_entropies_match_design() {
        let v = build_code(CodeId::Interior).entropy_vector();
        let h = |s: &str| v.entropy(s.parse::<RVSubset>().unwrap());
        assert_eq!(h("W_1"), 3);
        assert_eq!(h("S_{1,2}"), 2);
        assert_eq!(h("{W_1,W_2,W_3}"), 8);
        assert_eq!(v.entropy(RVSubset::FULL), 8);
        assert!(v.closure_consistent());
        assert!(v.fully_symmetric());
    }

    #[test]
    fn symmetrizing_preserves_the_normalized_point() {
        let sym = symmetrize(&build_code(CodeId::Msr));
        assert_eq!(sym.b_bits(), 24 * 3);
        assert_eq!(sym.normalized_point(), CodeId::point(&CodeId::Msr));
        let v = sym.entropy_vector();
        assert!(v.closure_consistent());
        assert!(v.fully_symmetric());
    }

    #[test]
    fn symmetrizing_an_asymmetric_code_restores_symmetry() {
        // One node stores both message bits, the others one parity each.
        let node_rows = [vec![0b01], vec![0b10], vec![0b11], vec![0b01, 0b10]];
        let send = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { Vec::new() } else { vec![0b1] })
        });
        let code = LinearCode::new(2, node_rows, send).unwrap();
        let lone = code.entropy_vector();
        assert!(lone.closure_consistent());
        assert!(!lone.fully_symmetric());
        let v = symmetrize(&code).entropy_vector();
        assert!(v.closure_consistent());
        assert!(v.fully_symmetric());
    }

    #[test]
    fn sampled_mode_is_deterministic_and_passes() {
        let sym = symmetrize(&build_code(CodeId::Interior));
        let mode = VerifyMode::Sampled { seed: 7, samples: 64 };
        let stats = sym.verify(mode).unwrap();
        assert_eq!(stats.messages, 64);
        assert_eq!(stats.repairs, 256);
    }

    #[test]
    fn undecodable_designs_are_rejected_at_construction() {
        // A node that stores nothing useful for reconstruction.
        let node_rows = [vec![0b01], vec![0b01], vec![0b01], vec![0b01]];
        let send = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { Vec::new() } else { vec![0b1] })
        });
        assert!(LinearCode::new(2, node_rows, send).is_err());
    }
}
