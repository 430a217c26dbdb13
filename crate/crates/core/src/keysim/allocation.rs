use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::keysim::pool::{Edge, KeyPools};
use crate::network::{ordered, EffectiveRateMatrix, NodeId};
use crate::routing::RoutingList;

/// Contiguous bit interval of a link pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: u64,
    pub len: u64,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.start as usize..(self.start + self.len) as usize
    }

    pub fn end(&self) -> u64 {
        self.start + self.len
    }
}

/// Identifies the relay segment used by one path of one record.
///
/// `record` indexes the routing list in canonical order; `path` indexes the
/// set's sorted member paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SegmentKey {
    pub record: usize,
    pub path: usize,
}

/// Partition of one link pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeAllocation {
    pub pool_len: u64,
    pub effective: Segment,
    /// Relay segments in carving order.
    pub relay: Vec<(SegmentKey, Segment)>,
}

impl EdgeAllocation {
    pub fn used(&self) -> u64 {
        self.relay.last().map_or(self.effective.end(), |(_, s)| s.end())
    }

    pub fn slack(&self) -> u64 {
        self.pool_len - self.used()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentAllocation {
    pub edges: BTreeMap<Edge, EdgeAllocation>,
    /// Relay segment length of each record, in routing-list order.
    pub record_bits: Vec<u64>,
}

impl SegmentAllocation {
    pub fn edge(&self, u: NodeId, v: NodeId) -> Option<&EdgeAllocation> {
        self.edges.get(&ordered(u, v))
    }

    pub fn relay_segment(&self, u: NodeId, v: NodeId, key: SegmentKey) -> Result<Segment> {
        self.edge(u, v)
            .and_then(|e| e.relay.iter().find(|(k, _)| *k == key).map(|(_, s)| *s))
            .ok_or(Error::MissingAllocation(u, v))
    }
}

/// Splits each pool into its effective segment followed by one relay segment
/// per record path that crosses the link, records in canonical order.
///
/// Every relay segment of a record has the same length, `rate * tau` bits,
/// on every link it crosses.
pub fn allocate_segments(
    pools: &KeyPools,
    list: &RoutingList,
    eff: &EffectiveRateMatrix,
) -> Result<SegmentAllocation> {
    let scale = pools.scale();
    let tau = pools.tau();
    let record_bits: Vec<u64> = list.iter().map(|(_, r)| scale.bits_over(r, tau)).collect();

    let mut edges: BTreeMap<Edge, EdgeAllocation> = pools
        .iter()
        .map(|((u, v), bits)| {
            let len = scale.bits_over(eff.get(u, v), tau);
            (
                (u, v),
                EdgeAllocation {
                    pool_len: bits.len() as u64,
                    effective: Segment { start: 0, len },
                    relay: Vec::new(),
                },
            )
        })
        .collect();

    for (record, (set, _)) in list.iter().enumerate() {
        for (path, p) in set.paths().iter().enumerate() {
            for (a, b) in p.links() {
                let alloc = edges.get_mut(&ordered(a, b)).ok_or_else(|| {
                    Error::RoutingMismatch(format!("path {p} uses missing link ({a}, {b})"))
                })?;
                let start = alloc.used();
                alloc.relay.push((
                    SegmentKey { record, path },
                    Segment {
                        start,
                        len: record_bits[record],
                    },
                ));
            }
        }
    }

    for (&(u, v), alloc) in &edges {
        if alloc.used() > alloc.pool_len {
            return Err(Error::CapacityExceeded {
                u,
                v,
                needed: alloc.used(),
                available: alloc.pool_len,
            });
        }
    }

    Ok(SegmentAllocation { edges, record_bits })
}
