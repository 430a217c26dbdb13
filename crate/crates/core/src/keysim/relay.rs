//! One-time-pad key hopping along a path.
//!
//! The key delivered over a path is the relay segment on its first link
//! (the link at the smaller endpoint). Every interior node publishes the XOR
//! of the segments on its incoming and outgoing links; the far endpoint
//! starts from its own last-link segment and peels the messages off in
//! reverse order.

use std::collections::BTreeMap;

use bitvec::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::keysim::allocation::{SegmentAllocation, SegmentKey};
use crate::keysim::pool::{KeyBits, LocalStore};
use crate::network::NodeId;
use crate::paths::Path;
use crate::routing::RoutingList;

/// Public message broadcast by an interior node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelayMessage {
    pub node: NodeId,
    #[serde(skip)]
    pub bits: KeyBits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayTranscript {
    pub key: SegmentKey,
    /// One message per interior node, in path order.
    pub messages: Vec<RelayMessage>,
}

/// Path key as derived independently at each endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRelay {
    pub at_low: KeyBits,
    pub at_high: KeyBits,
    pub transcript: RelayTranscript,
}

fn xor(a: &BitSlice<u8, Lsb0>, b: &BitSlice<u8, Lsb0>) -> KeyBits {
    debug_assert_eq!(a.len(), b.len());
    let mut out = KeyBits::from_bitslice(a);
    out ^= b;
    out
}

/// Relays the key for one path of one record.
///
/// `stores` must hold the local store of every node on the path, indexed by
/// node id.
pub fn relay_path_key(
    path: &Path,
    key: SegmentKey,
    alloc: &SegmentAllocation,
    stores: &[LocalStore],
) -> Result<PathRelay> {
    let nodes = path.nodes();
    let links: Vec<(NodeId, NodeId)> = path.links().collect();
    let seg = |k: usize| alloc.relay_segment(links[k].0, links[k].1, key);

    let low = &stores[nodes[0].0];
    let at_low = KeyBits::from_bitslice(low.segment(links[0].0, links[0].1, seg(0)?)?);

    let mut messages = Vec::with_capacity(nodes.len() - 2);
    for k in 1..links.len() {
        let node = nodes[k];
        let store = &stores[node.0];
        let incoming = store.segment(links[k - 1].0, links[k - 1].1, seg(k - 1)?)?;
        let outgoing = store.segment(links[k].0, links[k].1, seg(k)?)?;
        messages.push(RelayMessage {
            node,
            bits: xor(incoming, outgoing),
        });
    }

    let last = links.len() - 1;
    let high = &stores[nodes[nodes.len() - 1].0];
    let mut at_high = KeyBits::from_bitslice(high.segment(links[last].0, links[last].1, seg(last)?)?);
    for msg in messages.iter().rev() {
        at_high ^= msg.bits.as_bitslice();
    }

    Ok(PathRelay {
        at_low,
        at_high,
        transcript: RelayTranscript { key, messages },
    })
}

/// A pair key as assembled at one endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairKey {
    pub pair: (NodeId, NodeId),
    pub bits: KeyBits,
}

/// The pair key computed separately at both endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssembledPair {
    pub at_low: PairKey,
    pub at_high: PairKey,
}

impl AssembledPair {
    pub fn agrees(&self) -> bool {
        self.at_low.bits == self.at_high.bits
    }
}

/// XORs the path keys of every record and concatenates the records of each
/// pair in canonical order.
///
/// `relayed[record][path]` holds the relay result for that path.
pub fn assemble_pair_keys(
    list: &RoutingList,
    relayed: &[Vec<PathRelay>],
) -> Result<BTreeMap<(NodeId, NodeId), AssembledPair>> {
    if relayed.len() != list.len() {
        return Err(Error::RoutingMismatch(format!(
            "{} relayed records for {} routing records",
            relayed.len(),
            list.len()
        )));
    }
    let mut out: BTreeMap<(NodeId, NodeId), AssembledPair> = BTreeMap::new();
    for ((set, _), paths) in list.iter().zip(relayed) {
        let pair = set.endpoints();
        let block = |side: fn(&PathRelay) -> &KeyBits| {
            let mut acc = side(&paths[0]).clone();
            for p in &paths[1..] {
                acc ^= side(p).as_bitslice();
            }
            acc
        };
        let low = block(|p| &p.at_low);
        let high = block(|p| &p.at_high);
        let entry = out.entry(pair).or_insert_with(|| AssembledPair {
            at_low: PairKey {
                pair,
                bits: KeyBits::new(),
            },
            at_high: PairKey {
                pair,
                bits: KeyBits::new(),
            },
        });
        entry.at_low.bits.extend_from_bitslice(&low);
        entry.at_high.bits.extend_from_bitslice(&high);
    }
    Ok(out)
}
