//! Information-theoretic view of a node-compromise adversary.
//!
//! The adversary holds the full pools of every link incident to a
//! compromised node and reads every public relay message. For a record, each
//! relay segment is an unknown vector over GF(2); known segments and relay
//! messages are linear equations on them. The record's key block is the XOR
//! of the first-link segments of its paths, and the adversary learns it
//! exactly when that sum lies in the span of the equations. Otherwise the
//! block is independent of the view, since the segments are uniform.
//!
//! This module does not consult the path-based rule in
//! [`super::compromise`]; the two are cross-checked against each other.

use std::collections::{BTreeMap, BTreeSet};

use bitvec::prelude::*;

use crate::keysim::allocation::{SegmentAllocation, SegmentKey};
use crate::keysim::pool::{Edge, KeyBits, KeyPools};
use crate::keysim::relay::RelayTranscript;
use crate::network::{ordered, NodeId};
use crate::routing::RoutingList;

/// Everything the adversary observes about the relay segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryView {
    pub compromised: BTreeSet<NodeId>,
    /// Relay segments lying on links the adversary holds.
    pub known: BTreeMap<(Edge, SegmentKey), KeyBits>,
    /// Every public message: `(record, path, position)` to bits, where
    /// position `k` is the XOR of the segments on links `k` and `k + 1`.
    pub messages: BTreeMap<(SegmentKey, usize), KeyBits>,
}

impl AdversaryView {
    pub fn observe(
        compromised: &BTreeSet<NodeId>,
        pools: &KeyPools,
        alloc: &SegmentAllocation,
        transcripts: &[RelayTranscript],
    ) -> Self {
        let mut known = BTreeMap::new();
        for (&(u, v), edge) in &alloc.edges {
            if !(compromised.contains(&u) || compromised.contains(&v)) {
                continue;
            }
            let pool = pools.get(u, v).expect("allocation matches pools");
            for (key, seg) in &edge.relay {
                known.insert(((u, v), *key), KeyBits::from_bitslice(&pool[seg.range()]));
            }
        }
        let messages = transcripts
            .iter()
            .flat_map(|t| {
                t.messages
                    .iter()
                    .enumerate()
                    .map(move |(k, m)| ((t.key, k), m.bits.clone()))
            })
            .collect();
        AdversaryView {
            compromised: compromised.clone(),
            known,
            messages,
        }
    }

    /// Attempts to recover the key block of `record` from the view alone.
    pub fn reconstruct_block(&self, list: &RoutingList, record: usize, block_len: u64) -> Option<KeyBits> {
        let (set, _) = list.iter().nth(record)?;

        // Variables: one per (path, link position).
        let mut var_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut links: Vec<(SegmentKey, usize, Edge)> = Vec::new();
        for (path, p) in set.paths().iter().enumerate() {
            for (pos, (a, b)) in p.links().enumerate() {
                var_of.insert((path, pos), links.len());
                links.push((SegmentKey { record, path }, pos, ordered(a, b)));
            }
        }
        let nvars = links.len();
        let mut basis = XorBasis::new(nvars, block_len as usize);

        for (var, &(key, _, edge)) in links.iter().enumerate() {
            if let Some(bits) = self.known.get(&(edge, key)) {
                basis.insert(unit(nvars, &[var]), bits.clone());
            }
        }
        for (path, p) in set.paths().iter().enumerate() {
            let key = SegmentKey { record, path };
            for k in 0..p.hops().saturating_sub(1) {
                if let Some(bits) = self.messages.get(&(key, k)) {
                    let vars = [var_of[&(path, k)], var_of[&(path, k + 1)]];
                    basis.insert(unit(nvars, &vars), bits.clone());
                }
            }
        }

        let target: Vec<usize> = (0..set.m()).map(|path| var_of[&(path, 0)]).collect();
        basis.solve(unit(nvars, &target))
    }
}

fn unit(n: usize, vars: &[usize]) -> BitVec {
    let mut v = bitvec![0; n];
    for &k in vars {
        let cur = v[k];
        v.set(k, !cur);
    }
    v
}

/// Row-echelon basis over GF(2) with a value carried alongside each row.
struct XorBasis {
    rows: Vec<Option<(BitVec, KeyBits)>>,
    width: usize,
}

impl XorBasis {
    fn new(nvars: usize, width: usize) -> Self {
        XorBasis {
            rows: vec![None; nvars],
            width,
        }
    }

    fn reduce(&self, mut coeffs: BitVec, mut value: KeyBits) -> (BitVec, KeyBits) {
        for (pivot, row) in self.rows.iter().enumerate() {
            if let Some((rc, rv)) = row {
                if coeffs[pivot] {
                    coeffs ^= rc.as_bitslice();
                    value ^= rv.as_bitslice();
                }
            }
        }
        (coeffs, value)
    }

    fn insert(&mut self, coeffs: BitVec, value: KeyBits) {
        debug_assert_eq!(value.len(), self.width);
        let (coeffs, value) = self.reduce(coeffs, value);
        if let Some(pivot) = coeffs.first_one() {
            // Keep the basis fully reduced so `reduce` works in one pass.
            for row in self.rows.iter_mut().flatten() {
                if row.0[pivot] {
                    row.0 ^= coeffs.as_bitslice();
                    row.1 ^= value.as_bitslice();
                }
            }
            self.rows[pivot] = Some((coeffs, value));
        }
    }

    /// Value of the linear form `coeffs` if the equations determine it.
    fn solve(&self, coeffs: BitVec) -> Option<KeyBits> {
        let zero = bitvec![u8, Lsb0; 0; self.width];
        let (rest, value) = self.reduce(coeffs, zero);
        rest.not_any().then_some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: u8) -> KeyBits {
        KeyBits::from_element(v)
    }

    #[test]
    fn basis_solves_chain() {
        // x0 ^ x1 = a, x1 ^ x2 = b, x2 = c  =>  x0 = a ^ b ^ c
        let mut b = XorBasis::new(3, 8);
        b.insert(unit(3, &[0, 1]), bits(0b1010_0000));
        b.insert(unit(3, &[1, 2]), bits(0b0000_1111));
        assert_eq!(b.solve(unit(3, &[0])), None);
        b.insert(unit(3, &[2]), bits(0b1100_0011));
        assert_eq!(b.solve(unit(3, &[0])), Some(bits(0b1010_0000 ^ 0b0000_1111 ^ 0b1100_0011)));
        assert_eq!(b.solve(unit(3, &[0, 2])), Some(bits(0b1010_0000 ^ 0b0000_1111)));
    }

    #[test]
    fn redundant_equations_are_ignored() {
        let mut b = XorBasis::new(2, 8);
        b.insert(unit(2, &[0, 1]), bits(3));
        b.insert(unit(2, &[0, 1]), bits(3));
        assert_eq!(b.solve(unit(2, &[0])), None);
        assert_eq!(b.solve(unit(2, &[1, 0])), Some(bits(3)));
    }
}
