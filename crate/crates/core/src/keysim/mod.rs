//! Bit-level simulation of key relaying along a routing list.
//!
//! [`Simulation::run`] accumulates random pools on every link, carves them
//! into effective and relay segments, hops every record's path keys with
//! XOR relaying, and assembles each pair key separately at both endpoints
//! from that endpoint's own key material and the public transcripts.

pub mod adversary;
pub mod allocation;
pub mod compromise;
pub mod pool;
pub mod relay;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::network::{EffectiveRateMatrix, NetworkGraph, NodeId, Rate};
use crate::routing::RoutingList;

pub use adversary::AdversaryView;
pub use allocation::{allocate_segments, Segment, SegmentAllocation, SegmentKey};
pub use compromise::{
    assess_compromise, compromise_probability_bound, CompromiseReport, PairStatus,
};
pub use pool::{accumulate_pools, KeyBits, KeyPools, LocalStore};
pub use relay::{assemble_pair_keys, relay_path_key, AssembledPair, PairKey, PathRelay, RelayTranscript};

/// All intermediate state of one simulated key-distribution round.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub graph: NetworkGraph,
    pub list: RoutingList,
    pub effective: EffectiveRateMatrix,
    pub pools: KeyPools,
    pub allocation: SegmentAllocation,
    /// `relayed[record][path]`.
    pub relayed: Vec<Vec<PathRelay>>,
    /// Remote-pair keys from the routing list.
    pub remote_keys: BTreeMap<(NodeId, NodeId), AssembledPair>,
    /// Direct-link keys: each endpoint's copy of the effective segment.
    pub direct_keys: BTreeMap<(NodeId, NodeId), AssembledPair>,
}

impl Simulation {
    pub fn run(
        g: &NetworkGraph,
        list: &RoutingList,
        eff: &EffectiveRateMatrix,
        tau: f64,
        seed: u64,
        exec: Exec,
    ) -> Result<Self> {
        let pools = accumulate_pools(g, tau, seed, exec)?;
        Self::from_pools(g, list, eff, pools, exec)
    }

    /// Runs the round on caller-supplied pools.
    pub fn from_pools(
        g: &NetworkGraph,
        list: &RoutingList,
        eff: &EffectiveRateMatrix,
        pools: KeyPools,
        exec: Exec,
    ) -> Result<Self> {
        for (set, rate) in list.iter() {
            if !set.is_valid_in(g) {
                return Err(Error::RoutingMismatch(format!("set {set} is not a path set of this network")));
            }
            if rate <= Rate::ZERO {
                return Err(Error::RoutingMismatch(format!("set {set} has non-positive rate")));
            }
        }
        let allocation = allocate_segments(&pools, list, eff)?;
        let stores: Vec<LocalStore> = g.nodes().map(|v| pools.local_store(v)).collect();

        let records: Vec<_> = list.iter().enumerate().collect();
        let relayed = exec
            .map(&records, |(record, (set, _))| {
                set.paths()
                    .iter()
                    .enumerate()
                    .map(|(path, p)| {
                        relay_path_key(p, SegmentKey { record: *record, path }, &allocation, &stores)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let remote_keys = assemble_pair_keys(list, &relayed)?;

        let mut direct_keys = BTreeMap::new();
        for (u, v, _) in g.edges() {
            let seg = allocation.edge(u, v).expect("every link is allocated").effective;
            let side = |node: NodeId| -> Result<PairKey> {
                Ok(PairKey {
                    pair: (u, v),
                    bits: KeyBits::from_bitslice(stores[node.0].segment(u, v, seg)?),
                })
            };
            direct_keys.insert(
                (u, v),
                AssembledPair {
                    at_low: side(u)?,
                    at_high: side(v)?,
                },
            );
        }

        Ok(Simulation {
            graph: g.clone(),
            list: list.clone(),
            effective: eff.clone(),
            pools,
            allocation,
            relayed,
            remote_keys,
            direct_keys,
        })
    }

    pub fn transcripts(&self) -> Vec<RelayTranscript> {
        self.relayed
            .iter()
            .flatten()
            .map(|r| r.transcript.clone())
            .collect()
    }

    pub fn adversary_view(&self, compromised: &BTreeSet<NodeId>) -> AdversaryView {
        AdversaryView::observe(compromised, &self.pools, &self.allocation, &self.transcripts())
    }

    /// The record's key block as the endpoints compute it.
    pub fn record_block(&self, record: usize) -> KeyBits {
        let paths = &self.relayed[record];
        let mut acc = paths[0].at_low.clone();
        for p in &paths[1..] {
            acc ^= p.at_low.as_bitslice();
        }
        acc
    }

    /// Summarises key lengths, endpoint agreement and the compromise
    /// analysis, cross-checking the structural leak rule against the
    /// adversary's reconstruction.
    pub fn report(&self, compromised: &BTreeSet<NodeId>, epsilon: Option<f64>) -> SimulationReport {
        let scale = self.pools.scale();
        let tau = self.pools.tau();
        let mut pairs = Vec::new();
        for (&(u, v), k) in &self.direct_keys {
            pairs.push(PairSummary {
                pair: (u, v),
                direct: true,
                expected_bits: scale.bits_over(self.effective.get(u, v), tau),
                bits_at_low: k.at_low.bits.len() as u64,
                bits_at_high: k.at_high.bits.len() as u64,
                agree: k.agrees(),
            });
        }
        for (&(u, v), k) in &self.remote_keys {
            pairs.push(PairSummary {
                pair: (u, v),
                direct: false,
                expected_bits: scale.bits_over(self.effective.get(u, v), tau),
                bits_at_low: k.at_low.bits.len() as u64,
                bits_at_high: k.at_high.bits.len() as u64,
                agree: k.agrees(),
            });
        }
        pairs.sort_by_key(|p| p.pair);

        let compromise = assess_compromise(&self.list, compromised, |r| scale.bits_over(r, tau), epsilon);
        let view = self.adversary_view(compromised);
        let mut oracle_mismatches = Vec::new();
        for exposure in compromise.pairs.iter().flat_map(|p| &p.records) {
            let recovered = view.reconstruct_block(&self.list, exposure.record, exposure.bits);
            let correct = recovered.as_ref() == Some(&self.record_block(exposure.record));
            if recovered.is_some() != exposure.leaked || (recovered.is_some() && !correct) {
                oracle_mismatches.push(exposure.record);
            }
        }

        let mut warnings = Vec::new();
        for (set, rate) in self.list.iter() {
            if !scale.is_integral_over(rate, tau) {
                warnings.push(format!("record {set}: rate * tau is not a whole number of bits"));
            }
        }
        for (u, v, _) in self.graph.edges() {
            let r = self.effective.get(u, v);
            if !scale.is_integral_over(r, tau) {
                warnings.push(format!("link ({u}, {v}): effective rate * tau is fractional"));
            }
        }

        SimulationReport {
            tau,
            all_agree: pairs.iter().all(|p| p.agree),
            lengths_ok: pairs.iter().filter(|p| !p.direct).all(|p| {
                p.bits_at_low == p.expected_bits && p.bits_at_high == p.expected_bits
            }),
            pairs,
            compromise,
            oracle_mismatches,
            warnings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub pair: (NodeId, NodeId),
    pub direct: bool,
    pub expected_bits: u64,
    pub bits_at_low: u64,
    pub bits_at_high: u64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub tau: f64,
    pub all_agree: bool,
    /// Remote pair keys are exactly `R^eff tau` bits at both ends.
    pub lengths_ok: bool,
    pub pairs: Vec<PairSummary>,
    pub compromise: CompromiseReport,
    /// Records where the structural rule and the reconstruction oracle
    /// disagree. Always empty unless something is broken.
    pub oracle_mismatches: Vec<usize>,
    pub warnings: Vec<String>,
}
