//! Network graph, rate matrices and structural validation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 0-based node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

/// Orders an unordered node pair as `(min, max)`.
#[inline]
pub fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All unordered pairs `i < j` of an `n`-node network, in lexicographic order.
pub fn node_pairs(n: usize) -> impl Iterator<Item = (NodeId, NodeId)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (NodeId(i), NodeId(j))))
}

/// Signed key rate in integer base-resolution units.
///
/// Deficiencies can be negative, so the unit type is signed.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Rate(pub i64);

impl Rate {
    pub const ZERO: Rate = Rate(0);

    #[inline]
    pub fn units(self) -> i64 {
        self.0
    }
}

impl Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl Sub for Rate {
    type Output = Rate;
    fn sub(self, rhs: Rate) -> Rate {
        Rate(self.0 - rhs.0)
    }
}

impl Neg for Rate {
    type Output = Rate;
    fn neg(self) -> Rate {
        Rate(-self.0)
    }
}

impl AddAssign for Rate {
    fn add_assign(&mut self, rhs: Rate) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rate {
    fn sub_assign(&mut self, rhs: Rate) {
        self.0 -= rhs.0;
    }
}

/// Conversion between integer rate units and physical rates.
///
/// One unit equals `resolution_bps` bit/s. Files carry rates in kbit/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RateScale {
    pub resolution_bps: u64,
}

impl Default for RateScale {
    fn default() -> Self {
        RateScale { resolution_bps: 1 }
    }
}

impl RateScale {
    pub fn new(resolution_bps: u64) -> Result<Self> {
        if resolution_bps == 0 {
            return Err(Error::Schema("resolution_bps must be positive".into()));
        }
        Ok(RateScale { resolution_bps })
    }

    /// Converts kbit/s to units, rejecting values off the resolution grid.
    pub fn from_kbps(&self, kbps: f64) -> Result<Rate> {
        if !kbps.is_finite() {
            return Err(Error::Schema(format!("rate {kbps} is not finite")));
        }
        let units = kbps * 1000.0 / self.resolution_bps as f64;
        let rounded = units.round();
        // Decimal inputs such as 0.1 are not exact in binary; allow a relative
        // slack far below one unit.
        if (units - rounded).abs() > 1e-6 * rounded.abs().max(1.0) {
            return Err(Error::NotRepresentable {
                value: kbps,
                resolution_bps: self.resolution_bps,
            });
        }
        if rounded.abs() > i64::MAX as f64 / 4.0 {
            return Err(Error::Schema(format!("rate {kbps} kbit/s is out of range")));
        }
        Ok(Rate(rounded as i64))
    }

    #[inline]
    pub fn to_bps(&self, rate: Rate) -> i128 {
        rate.0 as i128 * self.resolution_bps as i128
    }

    pub fn to_kbps_f64(&self, rate: Rate) -> f64 {
        self.to_bps(rate) as f64 / 1000.0
    }

    /// Exact decimal rendering in kbit/s, e.g. `0.1`, `-0.25`, `3`.
    pub fn format_kbps(&self, rate: Rate) -> String {
        let bps = self.to_bps(rate);
        let sign = if bps < 0 { "-" } else { "" };
        let abs = bps.unsigned_abs();
        let whole = abs / 1000;
        let frac = abs % 1000;
        if frac == 0 {
            format!("{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            format!("{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }

    /// Number of key bits accumulated at `rate` over `tau` seconds, floored.
    pub fn bits_over(&self, rate: Rate, tau: f64) -> u64 {
        let bits = self.to_bps(rate) as f64 * tau;
        if bits <= 0.0 {
            return 0;
        }
        (bits + 1e-9).floor() as u64
    }

    /// Whether `rate * tau` is an integral number of bits.
    pub fn is_integral_over(&self, rate: Rate, tau: f64) -> bool {
        let bits = self.to_bps(rate) as f64 * tau;
        (bits - bits.round()).abs() < 1e-9
    }
}

/// Undirected graph whose edge weights are QKD key generation rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    node_count: usize,
    edges: BTreeMap<(NodeId, NodeId), Rate>,
    adjacency: Vec<Vec<NodeId>>,
    scale: RateScale,
}

impl NetworkGraph {
    /// Builds a graph, rejecting self-loops, duplicates, non-positive rates
    /// and out-of-range nodes. Connectivity is not checked here.
    pub fn new<I>(node_count: usize, edges: I, scale: RateScale) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Rate)>,
    {
        if node_count < 2 {
            return Err(Error::Schema(format!(
                "network needs at least 2 nodes, got {node_count}"
            )));
        }
        let mut map = BTreeMap::new();
        let mut adjacency = vec![Vec::new(); node_count];
        for (u, v, rate) in edges {
            if u.0 >= node_count || v.0 >= node_count {
                return Err(Error::Schema(format!(
                    "edge ({u}, {v}) references a node outside 0..{node_count}"
                )));
            }
            if u == v {
                return Err(Error::Schema(format!("self-loop at node {u}")));
            }
            if rate.0 <= 0 {
                return Err(Error::Schema(format!(
                    "edge ({u}, {v}) must have a positive rate"
                )));
            }
            let key = ordered(u, v);
            if map.insert(key, rate).is_some() {
                return Err(Error::Schema(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u.0].push(v);
            adjacency[v.0].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(NetworkGraph {
            node_count,
            edges: map,
            adjacency,
            scale,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn scale(&self) -> RateScale {
        self.scale
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    /// Edges as `(min, max, rate)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Rate)> + '_ {
        self.edges.iter().map(|(&(u, v), &r)| (u, v, r))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Link rate `R_ij`; zero when the nodes are not adjacent.
    pub fn rate(&self, i: NodeId, j: NodeId) -> Rate {
        self.edges.get(&ordered(i, j)).copied().unwrap_or(Rate::ZERO)
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.edges.contains_key(&ordered(i, j))
    }

    /// Neighbours in ascending order.
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adjacency[i.0]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i.0].len()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        i.0 < self.node_count
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.node_count
    }

    /// Unordered pairs that are not joined by an edge.
    pub fn remote_pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        node_pairs(self.node_count).filter(|&(i, j)| !self.has_edge(i, j))
    }
}

/// Symmetric dense matrix of rates with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SymMatrix {
    n: usize,
    data: Vec<Rate>,
}

impl SymMatrix {
    fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![Rate::ZERO; n * n],
        }
    }

    #[inline]
    fn get(&self, i: NodeId, j: NodeId) -> Rate {
        self.data[i.0 * self.n + j.0]
    }

    #[inline]
    fn set(&mut self, i: NodeId, j: NodeId, v: Rate) {
        self.data[i.0 * self.n + j.0] = v;
        self.data[j.0 * self.n + i.0] = v;
    }
}

/// Desired key rate `T_ij` for every node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetMatrix(SymMatrix);

impl TargetMatrix {
    /// The same target for every off-diagonal pair.
    pub fn uniform(n: usize, target: Rate) -> Result<Self> {
        if target.0 < 0 {
            return Err(Error::Schema("target rate must be non-negative".into()));
        }
        let mut m = SymMatrix::zeros(n);
        for (i, j) in node_pairs(n) {
            m.set(i, j, target);
        }
        Ok(TargetMatrix(m))
    }

    /// Full matrix form. Must be square, symmetric, non-negative, zero diagonal.
    pub fn from_rows(rows: &[Vec<Rate>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Schema("target matrix must be square".into()));
        }
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            if rows[i][i] != Rate::ZERO {
                return Err(Error::Schema(format!(
                    "target matrix diagonal entry ({i}, {i}) must be zero"
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if a != b {
                    return Err(Error::Schema(format!(
                        "target matrix is asymmetric at ({i}, {j})"
                    )));
                }
                if a.0 < 0 {
                    return Err(Error::Schema(format!(
                        "target ({i}, {j}) must be non-negative"
                    )));
                }
                m.set(NodeId(i), NodeId(j), a);
            }
        }
        Ok(TargetMatrix(m))
    }

    pub fn node_count(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn get(&self, i: NodeId, j: NodeId) -> Rate {
        self.0.get(i, j)
    }

    /// `Some(t)` if every off-diagonal entry equals `t`.
    pub fn as_uniform(&self) -> Option<Rate> {
        let mut pairs = node_pairs(self.0.n);
        let first = pairs.next().map(|(i, j)| self.get(i, j))?;
        pairs.all(|(i, j)| self.get(i, j) == first).then_some(first)
    }

    pub fn rows(&self) -> Vec<Vec<Rate>> {
        (0..self.0.n)
            .map(|i| (0..self.0.n).map(|j| self.get(NodeId(i), NodeId(j))).collect())
            .collect()
    }
}

/// Effective key rate `R^eff_ij`: residual rate on direct links, delivered
/// rate for remote pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveRateMatrix(SymMatrix);

impl EffectiveRateMatrix {
    /// `R_ij` on edges, zero elsewhere.
    pub fn from_graph(g: &NetworkGraph) -> Self {
        let mut m = SymMatrix::zeros(g.node_count());
        for (u, v, r) in g.edges() {
            m.set(u, v, r);
        }
        EffectiveRateMatrix(m)
    }

    pub fn node_count(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn get(&self, i: NodeId, j: NodeId) -> Rate {
        self.0.get(i, j)
    }

    #[inline]
    pub fn set(&mut self, i: NodeId, j: NodeId, v: Rate) {
        self.0.set(i, j, v)
    }

    #[inline]
    pub fn adjust(&mut self, i: NodeId, j: NodeId, by: Rate) {
        let v = self.get(i, j) + by;
        self.set(i, j, v);
    }

    pub fn rows(&self) -> Vec<Vec<Rate>> {
        (0..self.0.n)
            .map(|i| (0..self.0.n).map(|j| self.get(NodeId(i), NodeId(j))).collect())
            .collect()
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub m: usize,
    pub min_degree: usize,
    pub degree_violations: Vec<NodeId>,
    pub connected: bool,
    /// Remote pairs with no set of `m` disjoint paths. Empty until
    /// [`ValidationReport::check_m_sets`] runs.
    pub remote_pairs_without_m_sets: Vec<(NodeId, NodeId)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.connected && self.degree_violations.is_empty()
    }

    /// Fills `remote_pairs_without_m_sets` by enumerating path sets.
    pub fn check_m_sets(&mut self, g: &NetworkGraph, hop_limit: Option<usize>) {
        self.remote_pairs_without_m_sets = g
            .remote_pairs()
            .filter(|&(i, j)| {
                let paths = crate::paths::enumerate_simple_paths(g, i, j, hop_limit);
                crate::paths::enumerate_m_path_sets(&paths, self.m).is_empty()
            })
            .collect();
    }
}

/// Degree and connectivity check for the `m`-path scheme.
pub fn validate(g: &NetworkGraph, m: usize) -> ValidationReport {
    let degree_violations = g.nodes().filter(|&i| g.degree(i) < m).collect();
    ValidationReport {
        m,
        min_degree: g.nodes().map(|i| g.degree(i)).min().unwrap_or(0),
        degree_violations,
        connected: g.is_connected(),
        remote_pairs_without_m_sets: Vec::new(),
    }
}
