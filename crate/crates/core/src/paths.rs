//! Simple paths, disjoint path sets and their deficiency.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ordered, NetworkGraph, NodeId, Rate};

/// A simple path, stored oriented from its smaller endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<NodeId>", into = "Vec<NodeId>")]
pub struct Path {
    nodes: Vec<NodeId>,
}

impl Path {
    /// Checks length and distinctness; orients the path from its smaller
    /// endpoint. Adjacency is checked separately by [`Path::is_valid_in`].
    pub fn new(mut nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Schema("a path needs at least two nodes".into()));
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Schema(format!("path {nodes:?} repeats a node")));
        }
        if nodes[0] > nodes[nodes.len() - 1] {
            nodes.reverse();
        }
        Ok(Path { nodes })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `(min, max)` endpoint pair.
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn interior(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Links in path order, each as traversed (`from`, `to`).
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn is_valid_in(&self, g: &NetworkGraph) -> bool {
        self.nodes.iter().all(|&n| g.contains(n)) && self.links().all(|(a, b)| g.has_edge(a, b))
    }
}

impl TryFrom<Vec<NodeId>> for Path {
    type Error = Error;
    fn try_from(nodes: Vec<NodeId>) -> Result<Self> {
        Path::new(nodes)
    }
}

impl From<Path> for Vec<NodeId> {
    fn from(p: Path) -> Self {
        p.nodes
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, n) in self.nodes.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// `M` internally node-disjoint paths sharing both endpoints.
///
/// Members are kept sorted, so equality and hashing are independent of the
/// order in which paths were supplied. Sets order by endpoint pair first,
/// then by member paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Path>", into = "Vec<Path>")]
pub struct MPathSet {
    paths: Vec<Path>,
}

impl Ord for MPathSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.endpoints()
            .cmp(&other.endpoints())
            .then_with(|| self.paths.cmp(&other.paths))
    }
}

impl PartialOrd for MPathSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl MPathSet {
    pub fn new(mut paths: Vec<Path>) -> Result<Self> {
        let Some(first) = paths.first() else {
            return Err(Error::Schema("an M-path set needs at least one path".into()));
        };
        let ends = first.endpoints();
        if paths.iter().any(|p| p.endpoints() != ends) {
            return Err(Error::Schema("paths in a set must share endpoints".into()));
        }
        paths.sort();
        for (a, p) in paths.iter().enumerate() {
            for q in &paths[a + 1..] {
                if p.interior().iter().any(|n| q.contains(*n)) || p == q {
                    return Err(Error::Schema(format!("paths {p} and {q} overlap")));
                }
            }
        }
        Ok(MPathSet { paths })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn m(&self) -> usize {
        self.paths.len()
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        self.paths[0].endpoints()
    }

    pub fn total_hops(&self) -> usize {
        self.paths.iter().map(Path::hops).sum()
    }

    /// Every link of every member path, as unordered pairs.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.paths
            .iter()
            .flat_map(|p| p.links().map(|(a, b)| ordered(a, b)))
    }

    pub fn is_valid_in(&self, g: &NetworkGraph) -> bool {
        self.paths.iter().all(|p| p.is_valid_in(g))
    }
}

impl TryFrom<Vec<Path>> for MPathSet {
    type Error = Error;
    fn try_from(paths: Vec<Path>) -> Result<Self> {
        MPathSet::new(paths)
    }
}

impl From<MPathSet> for Vec<Path> {
    fn from(s: MPathSet) -> Self {
        s.paths
    }
}

impl fmt::Display for MPathSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.paths.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// All simple paths between `i` and `j` with at most `hop_limit` hops, in
/// lexicographic order of their node sequence (oriented from the smaller
/// endpoint).
pub fn enumerate_simple_paths(
    g: &NetworkGraph,
    i: NodeId,
    j: NodeId,
    hop_limit: Option<usize>,
) -> Vec<Path> {
    if i == j || !g.contains(i) || !g.contains(j) {
        return Vec::new();
    }
    let (src, dst) = ordered(i, j);
    let limit = hop_limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    let mut on_path = vec![false; g.node_count()];
    let mut stack = vec![src];
    on_path[src.0] = true;
    extend(g, dst, limit, &mut stack, &mut on_path, &mut out);
    out
}

fn extend(
    g: &NetworkGraph,
    dst: NodeId,
    limit: usize,
    stack: &mut Vec<NodeId>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
) {
    if stack.len() > limit {
        return;
    }
    let here = *stack.last().unwrap();
    for &next in g.neighbors(here) {
        if next == dst {
            let mut nodes = stack.clone();
            nodes.push(dst);
            out.push(Path { nodes });
        } else if !on_path[next.0] {
            on_path[next.0] = true;
            stack.push(next);
            extend(g, dst, limit, stack, on_path, out);
            stack.pop();
            on_path[next.0] = false;
        }
    }
}

type Mask = Vec<u64>;

fn interior_mask(p: &Path, words: usize) -> Mask {
    let mut m = vec![0u64; words];
    for n in p.interior() {
        m[n.0 / 64] |= 1 << (n.0 % 64);
    }
    m
}

/// Every `m`-subset of `paths` whose members are pairwise internally
/// disjoint. Subsets are produced in lexicographic order of path indices.
pub fn enumerate_m_path_sets(paths: &[Path], m: usize) -> Vec<MPathSet> {
    if m == 0 || paths.len() < m {
        return Vec::new();
    }
    let width = paths
        .iter()
        .flat_map(|p| p.nodes().iter())
        .map(|n| n.0 + 1)
        .max()
        .unwrap_or(1);
    let words = width.div_ceil(64);
    let masks: Vec<Mask> = paths.iter().map(|p| interior_mask(p, words)).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(m);
    let mut used = vec![0u64; words];
    choose(paths, &masks, m, 0, &mut chosen, &mut used, &mut out);
    out
}

fn choose(
    paths: &[Path],
    masks: &[Mask],
    m: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    used: &mut Mask,
    out: &mut Vec<MPathSet>,
) {
    if chosen.len() == m {
        let mut members: Vec<Path> = chosen.iter().map(|&k| paths[k].clone()).collect();
        members.sort();
        out.push(MPathSet { paths: members });
        return;
    }
    let remaining = m - chosen.len();
    for k in start..=paths.len().saturating_sub(remaining) {
        // A direct link has no interior, so only the interior masks matter.
        if masks[k].iter().zip(used.iter()).any(|(a, b)| a & b != 0) {
            continue;
        }
        for (u, a) in used.iter_mut().zip(&masks[k]) {
            *u |= a;
        }
        chosen.push(k);
        choose(paths, masks, m, k + 1, chosen, used, out);
        chosen.pop();
        for (u, a) in used.iter_mut().zip(&masks[k]) {
            *u &= !a;
        }
    }
}

/// Deficiency of the worst link on the worst path of `set`.
pub fn set_deficiency<F>(set: &MPathSet, deficiency: F) -> Rate
where
    F: Fn(NodeId, NodeId) -> Rate,
{
    set.edges()
        .map(|(a, b)| deficiency(a, b))
        .max()
        .expect("a path set has at least one link")
}

/// Per-pair memo of candidate path sets for one topology.
#[derive(Debug, Default)]
pub struct PathSetCache {
    m: usize,
    hop_limit: Option<usize>,
    sets: HashMap<(NodeId, NodeId), Arc<Vec<MPathSet>>>,
}

impl PathSetCache {
    pub fn new(m: usize, hop_limit: Option<usize>) -> Self {
        PathSetCache {
            m,
            hop_limit,
            sets: HashMap::new(),
        }
    }

    pub fn get(&mut self, g: &NetworkGraph, i: NodeId, j: NodeId) -> Arc<Vec<MPathSet>> {
        let key = ordered(i, j);
        let (m, limit) = (self.m, self.hop_limit);
        self.sets
            .entry(key)
            .or_insert_with(|| {
                let paths = enumerate_simple_paths(g, key.0, key.1, limit);
                Arc::new(enumerate_m_path_sets(&paths, m))
            })
            .clone()
    }
}
