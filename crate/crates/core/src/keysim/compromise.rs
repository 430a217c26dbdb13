use std::collections::BTreeSet;

use serde::Serialize;

use crate::network::{NodeId, Rate};
use crate::paths::{MPathSet, Path};
use crate::routing::RoutingList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Secure,
    PartiallyLeaked,
    FullyLeaked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordExposure {
    pub record: usize,
    pub set: MPathSet,
    pub bits: u64,
    /// Per member path: does it run through a compromised node.
    pub paths_exposed: Vec<bool>,
    pub leaked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairExposure {
    pub pair: (NodeId, NodeId),
    pub status: PairStatus,
    pub endpoint_compromised: bool,
    pub leaked_bits: u64,
    pub total_bits: u64,
    pub records: Vec<RecordExposure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompromiseReport {
    pub compromised: BTreeSet<NodeId>,
    pub pairs: Vec<PairExposure>,
    /// `epsilon^M` when a per-node compromise probability was supplied.
    pub bound: Option<f64>,
}

impl CompromiseReport {
    pub fn pair(&self, i: NodeId, j: NodeId) -> Option<&PairExposure> {
        let key = crate::network::ordered(i, j);
        self.pairs.iter().find(|p| p.pair == key)
    }
}

/// Whether an adversary holding `compromised` sees a node on the path.
///
/// Interior nodes relay the key; an endpoint holds it outright.
pub fn path_exposed(path: &Path, compromised: &BTreeSet<NodeId>) -> bool {
    path.nodes().iter().any(|n| compromised.contains(n))
}

/// Structural leak analysis: a record leaks iff every one of its paths runs
/// through a compromised node.
///
/// `bits_of` converts a record rate to its block length.
pub fn assess_compromise<F>(
    list: &RoutingList,
    compromised: &BTreeSet<NodeId>,
    bits_of: F,
    epsilon: Option<f64>,
) -> CompromiseReport
where
    F: Fn(Rate) -> u64,
{
    let mut pairs: Vec<PairExposure> = Vec::new();
    for (record, (set, rate)) in list.iter().enumerate() {
        let pair = set.endpoints();
        let paths_exposed: Vec<bool> = set.paths().iter().map(|p| path_exposed(p, compromised)).collect();
        let leaked = paths_exposed.iter().all(|&e| e);
        let bits = bits_of(rate);
        let exposure = RecordExposure {
            record,
            set: set.clone(),
            bits,
            paths_exposed,
            leaked,
        };
        match pairs.last_mut().filter(|p| p.pair == pair) {
            Some(p) => p.records.push(exposure),
            None => pairs.push(PairExposure {
                pair,
                status: PairStatus::Secure,
                endpoint_compromised: compromised.contains(&pair.0) || compromised.contains(&pair.1),
                leaked_bits: 0,
                total_bits: 0,
                records: vec![exposure],
            }),
        }
    }
    for p in &mut pairs {
        p.total_bits = p.records.iter().map(|r| r.bits).sum();
        p.leaked_bits = p.records.iter().filter(|r| r.leaked).map(|r| r.bits).sum();
        let leaked = p.records.iter().filter(|r| r.leaked).count();
        p.status = if leaked == 0 {
            PairStatus::Secure
        } else if leaked == p.records.len() {
            PairStatus::FullyLeaked
        } else {
            PairStatus::PartiallyLeaked
        };
    }
    pairs.sort_by_key(|p| p.pair);
    CompromiseReport {
        compromised: compromised.clone(),
        pairs,
        bound: epsilon.map(|e| compromise_probability_bound(list_m(list), e)),
    }
}

fn list_m(list: &RoutingList) -> usize {
    list.iter().map(|(s, _)| s.m()).min().unwrap_or(1)
}

/// Upper bound `epsilon^M` on the chance that a pair key leaks when each
/// trusted node falls independently with probability `epsilon`.
pub fn compromise_probability_bound(m: usize, epsilon: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&epsilon),
        "epsilon must lie in [0, 1], got {epsilon}"
    );
    epsilon.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(nodes: &[usize]) -> Path {
        Path::new(nodes.iter().map(|&n| NodeId(n)).collect()).unwrap()
    }

    fn list() -> RoutingList {
        let mut l = RoutingList::new();
        l.add(MPathSet::new(vec![p(&[1, 0, 3]), p(&[1, 4, 3])]).unwrap(), Rate(100));
        l.add(MPathSet::new(vec![p(&[0, 1, 4]), p(&[0, 2, 4])]).unwrap(), Rate(100));
        l.add(MPathSet::new(vec![p(&[0, 2, 4]), p(&[0, 3, 4])]).unwrap(), Rate(100));
        l
    }

    fn nodes(v: &[usize]) -> BTreeSet<NodeId> {
        v.iter().map(|&n| NodeId(n)).collect()
    }

    #[test]
    fn one_node_cannot_break_two_paths() {
        let r = assess_compromise(&list(), &nodes(&[0]), |r| r.0 as u64, None);
        let e = r.pair(NodeId(1), NodeId(3)).unwrap();
        assert_eq!(e.status, PairStatus::Secure);
        assert_eq!(e.records[0].paths_exposed, vec![true, false]);
    }

    #[test]
    fn both_paths_compromised_leak() {
        let r = assess_compromise(&list(), &nodes(&[0, 4]), |r| r.0 as u64, None);
        let e = r.pair(NodeId(1), NodeId(3)).unwrap();
        assert_eq!(e.status, PairStatus::FullyLeaked);
        assert_eq!(e.leaked_bits, 100);
    }

    #[test]
    fn partial_leak_over_several_records() {
        let r = assess_compromise(&list(), &nodes(&[1, 2]), |r| r.0 as u64, None);
        let e = r.pair(NodeId(0), NodeId(4)).unwrap();
        assert_eq!(e.status, PairStatus::PartiallyLeaked);
        assert_eq!((e.leaked_bits, e.total_bits), (100, 200));
    }

    #[test]
    fn empty_adversary() {
        let r = assess_compromise(&list(), &BTreeSet::new(), |r| r.0 as u64, Some(0.1));
        assert!(r.pairs.iter().all(|p| p.status == PairStatus::Secure));
        assert!((r.bound.unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn bound_values() {
        assert!((compromise_probability_bound(2, 0.1) - 0.01).abs() < 1e-15);
        assert_eq!(compromise_probability_bound(1, 0.37), 0.37);
        assert_eq!(compromise_probability_bound(3, 0.5), 0.125);
    }
}
