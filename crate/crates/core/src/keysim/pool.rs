use std::collections::BTreeMap;

use bitvec::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::keysim::allocation::Segment;
use crate::network::{ordered, NetworkGraph, NodeId, RateScale};

pub type KeyBits = BitVec<u8, Lsb0>;
pub type Edge = (NodeId, NodeId);

/// Secret key accumulated on every link over one period, `|K_ij| = R_ij tau`.
///
/// Both endpoints of a link hold identical copies of its pool.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyPools {
    scale: RateScale,
    tau: f64,
    pools: BTreeMap<Edge, KeyBits>,
}

impl KeyPools {
    pub fn scale(&self) -> RateScale {
        self.scale
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Option<&KeyBits> {
        self.pools.get(&ordered(u, v))
    }

    pub fn get_mut(&mut self, u: NodeId, v: NodeId) -> Option<&mut KeyBits> {
        self.pools.get_mut(&ordered(u, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, &KeyBits)> {
        self.pools.iter().map(|(&e, b)| (e, b))
    }

    /// Copies of the pools on the links incident to `node`.
    pub fn local_store(&self, node: NodeId) -> LocalStore {
        LocalStore {
            node,
            pools: self
                .pools
                .iter()
                .filter(|(&(u, v), _)| u == node || v == node)
                .map(|(&e, b)| (e, b.clone()))
                .collect(),
        }
    }
}

/// Fills one pool per link with uniformly random bits.
///
/// Link `k` (in lexicographic edge order) draws from ChaCha8 seeded with
/// `seed` on stream `k`, so the result does not depend on `exec`.
pub fn accumulate_pools(g: &NetworkGraph, tau: f64, seed: u64, exec: Exec) -> Result<KeyPools> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let scale = g.scale();
    let edges: Vec<_> = g.edges().enumerate().collect();
    let filled = exec.map(&edges, |&(k, (u, v, rate))| {
        let len = scale.bits_over(rate, tau) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut bits = KeyBits::from_vec(bytes);
        bits.truncate(len);
        ((u, v), bits)
    });
    Ok(KeyPools {
        scale,
        tau,
        pools: filled.into_iter().collect(),
    })
}

/// Key material one node can see: the pools of its own links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStore {
    node: NodeId,
    pools: BTreeMap<Edge, KeyBits>,
}

impl LocalStore {
    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn segment(&self, u: NodeId, v: NodeId, seg: Segment) -> Result<&BitSlice<u8, Lsb0>> {
        let pool = self.pools.get(&ordered(u, v)).ok_or_else(|| {
            Error::RoutingMismatch(format!("node {} holds no key for link ({u}, {v})", self.node))
        })?;
        pool.get(seg.range()).ok_or(Error::MissingAllocation(u, v))
    }
}
