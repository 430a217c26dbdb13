//! Greedy iterative M-path key routing.
//!
//! Each iteration picks the node pair with the largest deficiency
//! `D(i,j) = T_ij - R^eff_ij`, chooses the candidate path set whose worst
//! link has the lowest deficiency (shortest total length on ties), credits
//! the pair with `delta_r` and debits every link of the chosen set by the
//! same amount. The loop ends when the network-wide maximum deficiency
//! `Delta` is no longer positive, the iteration budget runs out, the worst
//! pair is a direct link, or an increment would make `Delta` worse.
//!
//! Random tie-breaks draw from a [`TieBreaker`]. The default
//! [`SeededTieBreaker`] uses ChaCha8 seeded from the 64-bit config seed and
//! draws exactly one `u64` range sample per tie with more than one option:
//! first the pair tie, then the set tie, iteration by iteration. Singleton
//! choices consume nothing.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::network::{
    node_pairs, ordered, validate, EffectiveRateMatrix, NetworkGraph, NodeId, Rate, TargetMatrix,
};
use crate::paths::{set_deficiency, MPathSet, PathSetCache};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouterConfig {
    /// Number of disjoint paths per set.
    pub m: usize,
    /// Increment per iteration, in rate units.
    pub delta_r: Rate,
    /// Iteration budget; `None` is unbounded.
    pub r_max: Option<u64>,
    pub seed: u64,
    pub hop_limit: Option<usize>,
    /// Skip candidate sets with a link whose effective rate is below `delta_r`.
    pub strict_guard: bool,
}

impl RouterConfig {
    pub fn new(m: usize, delta_r: Rate) -> Self {
        RouterConfig {
            m,
            delta_r,
            r_max: None,
            seed: 0,
            hop_limit: None,
            strict_guard: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if self.delta_r.0 <= 0 {
            return Err(Error::Config("delta_r must be positive".into()));
        }
        if self.hop_limit == Some(0) {
            return Err(Error::Config("hop_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// One `(set : rate)` entry of a routing list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingRecord {
    pub set: MPathSet,
    pub rate: Rate,
}

/// Rates routed per path set. Iteration follows the canonical set order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingList {
    records: BTreeMap<MPathSet, Rate>,
}

impl RoutingList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `rate` to the record for `set`, creating it if needed.
    pub fn add(&mut self, set: MPathSet, rate: Rate) {
        *self.records.entry(set).or_insert(Rate::ZERO) += rate;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn rate_of(&self, set: &MPathSet) -> Option<Rate> {
        self.records.get(set).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MPathSet, Rate)> {
        self.records.iter().map(|(s, &r)| (s, r))
    }

    pub fn records(&self) -> Vec<RoutingRecord> {
        self.iter()
            .map(|(s, r)| RoutingRecord {
                set: s.clone(),
                rate: r,
            })
            .collect()
    }

    /// Records whose endpoints are the pair, in canonical order.
    pub fn for_pair(&self, i: NodeId, j: NodeId) -> impl Iterator<Item = (&MPathSet, Rate)> {
        let key = ordered(i, j);
        self.iter().filter(move |(s, _)| s.endpoints() == key)
    }

    /// Total rate routed to the pair.
    pub fn pair_rate(&self, i: NodeId, j: NodeId) -> Rate {
        self.for_pair(i, j).fold(Rate::ZERO, |acc, (_, r)| acc + r)
    }

    /// Distinct endpoint pairs, ascending (records are grouped by pair).
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut v: Vec<_> = self.records.keys().map(MPathSet::endpoints).collect();
        v.dedup();
        v
    }

    pub fn total_rate(&self) -> Rate {
        self.records.values().fold(Rate::ZERO, |a, &r| a + r)
    }

    /// Total rate of the records whose sets traverse the link.
    pub fn load_on(&self, u: NodeId, v: NodeId) -> Rate {
        let key = ordered(u, v);
        self.iter()
            .filter(|(s, _)| s.edges().any(|e| e == key))
            .fold(Rate::ZERO, |a, (_, r)| a + r)
    }

    /// Effective rates implied by carrying this list over `g`: link rates
    /// less their relay load, plus the routed rate at each remote pair.
    pub fn effective_rates(&self, g: &NetworkGraph) -> Result<EffectiveRateMatrix> {
        let mut eff = EffectiveRateMatrix::from_graph(g);
        for (set, rate) in self.iter() {
            if !set.is_valid_in(g) {
                return Err(Error::RoutingMismatch(format!("set {set} is not a path set of this network")));
            }
            let (i, j) = set.endpoints();
            eff.adjust(i, j, rate);
            for (u, v) in set.edges() {
                eff.adjust(u, v, -rate);
            }
        }
        for (u, v, _) in g.edges() {
            if eff.get(u, v) < Rate::ZERO {
                return Err(Error::RoutingMismatch(format!("routing list overloads link ({u}, {v})")));
            }
        }
        Ok(eff)
    }
}

impl FromIterator<RoutingRecord> for RoutingList {
    fn from_iter<I: IntoIterator<Item = RoutingRecord>>(iter: I) -> Self {
        let mut list = RoutingList::new();
        for r in iter {
            list.add(r.set, r.rate);
        }
        list
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    RMax,
    DirectPairWorst,
    CostWorsened,
    NoMSet,
    GuardExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::RMax => "r_max",
            StopReason::DirectPairWorst => "direct_pair_worst",
            StopReason::CostWorsened => "cost_worsened",
            StopReason::NoMSet => "no_m_set",
            StopReason::GuardExhausted => "guard_exhausted",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A candidate set and its deficiency as seen during one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateScore {
    pub set: MPathSet,
    pub deficiency: Rate,
    /// Removed by the strict guard before selection.
    pub guarded: bool,
}

/// One accepted iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationTrace {
    /// 1-based index of the accepted increment.
    pub r: u64,
    pub selected_pair: (NodeId, NodeId),
    /// Size of the worst-pair argmax.
    pub pairs_tied: usize,
    /// Sets left for the final random choice.
    pub candidates_tied: usize,
    pub chosen_set: MPathSet,
    pub delta_before: Rate,
    pub delta_after: Rate,
    /// Set on the last row when the run stopped right after it.
    pub stop_reason: Option<StopReason>,
    /// Every candidate with its deficiency; only kept when candidate logging
    /// is enabled on the [`Router`].
    pub candidates: Option<Vec<CandidateScore>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingOutcome {
    pub routing_list: RoutingList,
    pub effective: EffectiveRateMatrix,
    pub trace: Vec<IterationTrace>,
    pub final_delta: Rate,
    pub iterations: u64,
    pub stop_reason: StopReason,
    pub delta_r: Rate,
}

/// What a tie-break is choosing between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieKind {
    Pair,
    Set,
}

/// Source of random tie-break decisions.
pub trait TieBreaker {
    /// Returns an index in `0..options`.
    fn pick(&mut self, kind: TieKind, options: usize) -> usize;
}

pub struct SeededTieBreaker {
    rng: ChaCha8Rng,
}

impl SeededTieBreaker {
    pub fn new(seed: u64) -> Self {
        SeededTieBreaker {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl TieBreaker for SeededTieBreaker {
    fn pick(&mut self, _kind: TieKind, options: usize) -> usize {
        if options <= 1 {
            return 0;
        }
        self.rng.gen_range(0..options as u64) as usize
    }
}

/// `Delta`: the maximum of `T_ij - R^eff_ij` over all unordered pairs.
pub fn cost_delta(targets: &TargetMatrix, eff: &EffectiveRateMatrix) -> Rate {
    node_pairs(eff.node_count())
        .map(|(i, j)| targets.get(i, j) - eff.get(i, j))
        .max()
        .expect("at least two nodes")
}

/// A uniformly chosen element of the deficiency argmax, with the argmax size.
pub fn select_worst_pair<F>(
    n: usize,
    deficiency: F,
    tb: &mut dyn TieBreaker,
) -> ((NodeId, NodeId), usize)
where
    F: Fn(NodeId, NodeId) -> Rate,
{
    let mut best = Rate(i64::MIN);
    let mut tied = Vec::new();
    for (i, j) in node_pairs(n) {
        let d = deficiency(i, j);
        if d > best {
            best = d;
            tied.clear();
        }
        if d == best {
            tied.push((i, j));
        }
    }
    let k = tb.pick(TieKind::Pair, tied.len());
    (tied[k], tied.len())
}

/// Index of the chosen set among `scores` and the size of the final tie.
///
/// Keeps the sets with minimal deficiency, then those with minimal total
/// hop count, and picks one of the survivors uniformly.
pub fn select_optimal_set(
    candidates: &[MPathSet],
    scores: &[Rate],
    tb: &mut dyn TieBreaker,
) -> (usize, usize) {
    assert_eq!(candidates.len(), scores.len());
    assert!(!candidates.is_empty(), "no candidate sets");
    let best = *scores.iter().min().unwrap();
    let pre_opt: Vec<usize> = (0..scores.len()).filter(|&k| scores[k] == best).collect();
    let shortest = pre_opt
        .iter()
        .map(|&k| candidates[k].total_hops())
        .min()
        .unwrap();
    let survivors: Vec<usize> = pre_opt
        .into_iter()
        .filter(|&k| candidates[k].total_hops() == shortest)
        .collect();
    let k = tb.pick(TieKind::Set, survivors.len());
    (survivors[k], survivors.len())
}

/// Credits the pair with `delta_r` and debits every link of `set`.
///
/// With `strict_guard`, fails without modifying anything if a link holds
/// less than `delta_r`.
pub fn apply_increment(
    eff: &mut EffectiveRateMatrix,
    pair: (NodeId, NodeId),
    set: &MPathSet,
    delta_r: Rate,
    strict_guard: bool,
) -> Result<()> {
    let pair = ordered(pair.0, pair.1);
    if set.endpoints() != pair {
        return Err(Error::EndpointMismatch {
            set: set.endpoints(),
            pair,
        });
    }
    if strict_guard {
        if let Some((u, v)) = set.edges().find(|&(u, v)| eff.get(u, v) < delta_r) {
            return Err(Error::GuardViolation(u, v));
        }
    }
    eff.adjust(pair.0, pair.1, delta_r);
    for (u, v) in set.edges() {
        eff.adjust(u, v, -delta_r);
    }
    Ok(())
}

fn revert_increment(
    eff: &mut EffectiveRateMatrix,
    pair: (NodeId, NodeId),
    set: &MPathSet,
    delta_r: Rate,
) {
    eff.adjust(pair.0, pair.1, -delta_r);
    for (u, v) in set.edges() {
        eff.adjust(u, v, delta_r);
    }
}

/// Routing engine bound to one network and target matrix.
pub struct Router<'a> {
    graph: &'a NetworkGraph,
    targets: &'a TargetMatrix,
    cfg: RouterConfig,
    exec: Exec,
    log_candidates: bool,
}

/// Candidate sets are scored in parallel only above this count.
const PAR_CANDIDATES: usize = 128;

impl<'a> Router<'a> {
    /// Checks the preconditions: valid config, matching sizes, connected
    /// graph and every node of degree at least `M`.
    pub fn new(graph: &'a NetworkGraph, targets: &'a TargetMatrix, cfg: RouterConfig) -> Result<Self> {
        cfg.check()?;
        if targets.node_count() != graph.node_count() {
            return Err(Error::Config(format!(
                "target matrix covers {} nodes, graph has {}",
                targets.node_count(),
                graph.node_count()
            )));
        }
        let report = validate(graph, cfg.m);
        if !report.connected {
            return Err(Error::Disconnected);
        }
        if let Some(&node) = report.degree_violations.first() {
            return Err(Error::DegreeTooLow {
                node,
                degree: graph.degree(node),
                m: cfg.m,
            });
        }
        Ok(Router {
            graph,
            targets,
            cfg,
            exec: Exec::default(),
            log_candidates: false,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Keep every candidate's deficiency in the trace.
    pub fn with_candidate_log(mut self, on: bool) -> Self {
        self.log_candidates = on;
        self
    }

    pub fn config(&self) -> &RouterConfig {
        &self.cfg
    }

    /// Runs with the seeded tie-breaker.
    pub fn run(&self) -> RoutingOutcome {
        self.run_with(&mut SeededTieBreaker::new(self.cfg.seed))
    }

    pub fn run_with(&self, tb: &mut dyn TieBreaker) -> RoutingOutcome {
        let g = self.graph;
        let t = self.targets;
        let dr = self.cfg.delta_r;
        let mut cache = PathSetCache::new(self.cfg.m, self.cfg.hop_limit);
        let mut eff = EffectiveRateMatrix::from_graph(g);
        let mut list = RoutingList::new();
        let mut trace: Vec<IterationTrace> = Vec::new();
        let mut delta = cost_delta(t, &eff);
        let mut r: u64 = 0;

        let stop = loop {
            if delta <= Rate::ZERO {
                break StopReason::Converged;
            }
            if self.cfg.r_max.is_some_and(|max| r >= max) {
                break StopReason::RMax;
            }

            let (pair, pairs_tied) =
                select_worst_pair(g.node_count(), |i, j| t.get(i, j) - eff.get(i, j), tb);
            if g.has_edge(pair.0, pair.1) {
                break StopReason::DirectPairWorst;
            }

            let all = cache.get(g, pair.0, pair.1);
            if all.is_empty() {
                break StopReason::NoMSet;
            }

            let current = &eff;
            let scored: Vec<(Rate, bool)> = self.exec.map_min(&all, PAR_CANDIDATES, |s| {
                let d = set_deficiency(s, |i, j| t.get(i, j) - current.get(i, j));
                let guarded = self.cfg.strict_guard && s.edges().any(|(u, v)| current.get(u, v) < dr);
                (d, guarded)
            });

            let (eligible, scores): (Vec<MPathSet>, Vec<Rate>) = all
                .iter()
                .zip(&scored)
                .filter(|(_, (_, guarded))| !guarded)
                .map(|(s, (d, _))| (s.clone(), *d))
                .unzip();
            if eligible.is_empty() {
                break StopReason::GuardExhausted;
            }

            let (k, candidates_tied) = select_optimal_set(&eligible, &scores, tb);
            let chosen = &eligible[k];

            apply_increment(&mut eff, pair, chosen, dr, self.cfg.strict_guard)
                .expect("guarded candidates never violate the guard");
            let updated = cost_delta(t, &eff);
            if updated > delta {
                revert_increment(&mut eff, pair, chosen, dr);
                break StopReason::CostWorsened;
            }

            list.add(chosen.clone(), dr);
            r += 1;
            let candidates = self.log_candidates.then(|| {
                all.iter()
                    .zip(&scored)
                    .map(|(s, &(deficiency, guarded))| CandidateScore {
                        set: s.clone(),
                        deficiency,
                        guarded,
                    })
                    .collect()
            });
            trace.push(IterationTrace {
                r,
                selected_pair: pair,
                pairs_tied,
                candidates_tied,
                chosen_set: chosen.clone(),
                delta_before: delta,
                delta_after: updated,
                stop_reason: None,
                candidates,
            });
            delta = updated;
        };

        if let Some(last) = trace.last_mut() {
            last.stop_reason = Some(stop);
        }
        RoutingOutcome {
            routing_list: list,
            effective: eff,
            trace,
            final_delta: delta,
            iterations: r,
            stop_reason: stop,
            delta_r: dr,
        }
    }
}

/// Validates preconditions and runs with the seeded tie-breaker.
pub fn run(g: &NetworkGraph, t: &TargetMatrix, cfg: &RouterConfig) -> Result<RoutingOutcome> {
    Ok(Router::new(g, t, cfg.clone())?.run())
}

/// Runs independent configurations, concurrently when `exec` allows.
/// Results are in the order of `configs`.
pub fn sweep(
    g: &NetworkGraph,
    t: &TargetMatrix,
    configs: &[RouterConfig],
    exec: Exec,
) -> Result<Vec<RoutingOutcome>> {
    for cfg in configs {
        Router::new(g, t, cfg.clone())?;
    }
    Ok(exec.map(configs, |cfg| {
        Router::new(g, t, cfg.clone())
            .expect("checked above")
            .with_exec(Exec::Sequential)
            .run()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::RateScale;
    use crate::paths::Path;

    fn p(nodes: &[usize]) -> Path {
        Path::new(nodes.iter().map(|&n| NodeId(n)).collect()).unwrap()
    }

    fn set(paths: &[&[usize]]) -> MPathSet {
        MPathSet::new(paths.iter().map(|x| p(x)).collect()).unwrap()
    }

    fn walkthrough() -> NetworkGraph {
        let e = [
            (0, 1, 500),
            (0, 2, 400),
            (0, 3, 500),
            (1, 2, 500),
            (1, 4, 400),
            (2, 3, 500),
            (2, 4, 300),
            (3, 4, 600),
        ];
        NetworkGraph::new(
            5,
            e.iter().map(|&(u, v, r)| (NodeId(u), NodeId(v), Rate(r))),
            RateScale::default(),
        )
        .unwrap()
    }

    struct Fixed(Vec<usize>);

    impl TieBreaker for Fixed {
        fn pick(&mut self, _: TieKind, options: usize) -> usize {
            if options <= 1 {
                0
            } else {
                self.0.remove(0)
            }
        }
    }

    #[test]
    fn initial_delta_on_walkthrough() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate(200)).unwrap();
        let eff = EffectiveRateMatrix::from_graph(&g);
        assert_eq!(cost_delta(&t, &eff), Rate(200));
        let (pair, tied) =
            select_worst_pair(5, |i, j| t.get(i, j) - eff.get(i, j), &mut Fixed(vec![1]));
        assert_eq!(tied, 2);
        assert_eq!(pair, (NodeId(1), NodeId(3)));
    }

    #[test]
    fn effective_rates_rebuild_from_list() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate(200)).unwrap();
        let out = run(&g, &t, &RouterConfig::new(2, Rate(100)).with_seed(3)).unwrap();
        assert_eq!(out.routing_list.effective_rates(&g).unwrap(), out.effective);

        let mut heavy = RoutingList::new();
        heavy.add(set(&[&[0, 2, 4], &[0, 3, 4]]), Rate(350));
        assert!(matches!(heavy.effective_rates(&g), Err(Error::RoutingMismatch(m)) if m.contains("(2, 4)")));
    }

    #[test]
    fn zero_target_is_already_converged() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate::ZERO).unwrap();
        let out = run(&g, &t, &RouterConfig::new(2, Rate(100))).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.routing_list.is_empty());
        assert_eq!(out.stop_reason, StopReason::Converged);
        assert!(out.final_delta <= Rate::ZERO);
    }

    #[test]
    fn unique_worst_pair_needs_no_draw() {
        struct Never;
        impl TieBreaker for Never {
            fn pick(&mut self, _: TieKind, options: usize) -> usize {
                assert_eq!(options, 1);
                0
            }
        }
        let (pair, tied) = select_worst_pair(
            3,
            |i, j| if (i.0, j.0) == (0, 2) { Rate(5) } else { Rate(0) },
            &mut Never,
        );
        assert_eq!((pair, tied), ((NodeId(0), NodeId(2)), 1));
    }

    #[test]
    fn increment_and_zero_step() {
        let g = walkthrough();
        let mut eff = EffectiveRateMatrix::from_graph(&g);
        let s = set(&[&[1, 0, 3], &[1, 2, 3]]);
        apply_increment(&mut eff, (NodeId(3), NodeId(1)), &s, Rate(100), true).unwrap();
        assert_eq!(eff.get(NodeId(1), NodeId(3)), Rate(100));
        for (u, v) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
            assert_eq!(eff.get(NodeId(u), NodeId(v)), Rate(400));
        }
        assert_eq!(eff.get(NodeId(1), NodeId(4)), Rate(400));

        let before = eff.clone();
        apply_increment(&mut eff, (NodeId(1), NodeId(3)), &s, Rate(0), true).unwrap();
        assert_eq!(eff, before);
    }

    #[test]
    fn increment_rejects_wrong_pair_and_guard() {
        let g = walkthrough();
        let mut eff = EffectiveRateMatrix::from_graph(&g);
        let s = set(&[&[1, 0, 3], &[1, 2, 3]]);
        assert!(matches!(
            apply_increment(&mut eff, (NodeId(0), NodeId(4)), &s, Rate(100), true),
            Err(Error::EndpointMismatch { .. })
        ));
        let before = eff.clone();
        assert!(matches!(
            apply_increment(&mut eff, (NodeId(1), NodeId(3)), &s, Rate(600), true),
            Err(Error::GuardViolation(..))
        ));
        assert_eq!(eff, before);
        apply_increment(&mut eff, (NodeId(1), NodeId(3)), &s, Rate(600), false).unwrap();
        assert_eq!(eff.get(NodeId(0), NodeId(1)), Rate(-100));
    }

    #[test]
    fn optimal_set_prefers_low_deficiency_then_short() {
        let cands = vec![
            set(&[&[0, 1, 4], &[0, 2, 3, 4]]),
            set(&[&[0, 1, 4], &[0, 3, 4]]),
            set(&[&[0, 2, 1, 4], &[0, 3, 4]]),
            set(&[&[0, 2, 4], &[0, 3, 4]]),
        ];
        let scores = vec![Rate(-200), Rate(-200), Rate(-200), Rate(-100)];
        let (k, tied) = select_optimal_set(&cands, &scores, &mut SeededTieBreaker::new(0));
        assert_eq!((k, tied), (1, 1));
    }

    #[test]
    fn walkthrough_run_with_reference_choices() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate(200)).unwrap();
        let router = Router::new(&g, &t, RouterConfig::new(2, Rate(100))).unwrap();
        // iter 1: pair (1,3) is index 1 of [(0,4),(1,3)]; iter 3: same, then
        // {(1,4,3),(1,2,3)} is the last of the three shortest sets.
        let out = router.run_with(&mut Fixed(vec![1, 1, 2]));
        assert_eq!(out.iterations, 4);
        assert_eq!(out.final_delta, Rate::ZERO);
        assert_eq!(out.stop_reason, StopReason::Converged);
        let expected: RoutingList = [
            set(&[&[1, 0, 3], &[1, 2, 3]]),
            set(&[&[1, 4, 3], &[1, 2, 3]]),
            set(&[&[0, 1, 4], &[0, 3, 4]]),
            set(&[&[0, 2, 4], &[0, 3, 4]]),
        ]
        .into_iter()
        .map(|s| RoutingRecord { set: s, rate: Rate(100) })
        .collect();
        assert_eq!(out.routing_list, expected);
    }

    #[test]
    fn r_max_bounds_iterations() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate(200)).unwrap();
        let mut cfg = RouterConfig::new(2, Rate(100));
        cfg.r_max = Some(2);
        let out = run(&g, &t, &cfg).unwrap();
        assert_eq!(out.iterations, 2);
        assert_eq!(out.stop_reason, StopReason::RMax);
        assert_eq!(out.trace.last().unwrap().stop_reason, Some(StopReason::RMax));
    }

    #[test]
    fn rejects_degree_violation() {
        let g = NetworkGraph::new(
            3,
            [(NodeId(0), NodeId(1), Rate(1)), (NodeId(1), NodeId(2), Rate(1))],
            RateScale::default(),
        )
        .unwrap();
        let t = TargetMatrix::uniform(3, Rate(1)).unwrap();
        assert!(matches!(
            Router::new(&g, &t, RouterConfig::new(2, Rate(1))),
            Err(Error::DegreeTooLow { .. })
        ));
    }

    #[test]
    fn direct_pair_worst_stops() {
        // Square whose link (0,1) has a target far above its rate.
        let g = NetworkGraph::new(
            4,
            [
                (NodeId(0), NodeId(1), Rate(10)),
                (NodeId(1), NodeId(2), Rate(1000)),
                (NodeId(2), NodeId(3), Rate(1000)),
                (NodeId(3), NodeId(0), Rate(1000)),
            ],
            RateScale::default(),
        )
        .unwrap();
        let mut rows = vec![vec![Rate(50); 4]; 4];
        for (k, row) in rows.iter_mut().enumerate() {
            row[k] = Rate::ZERO;
        }
        rows[0][1] = Rate(1000);
        rows[1][0] = Rate(1000);
        let t = TargetMatrix::from_rows(&rows).unwrap();
        let out = run(&g, &t, &RouterConfig::new(2, Rate(10))).unwrap();
        assert_eq!(out.stop_reason, StopReason::DirectPairWorst);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn no_m_set_stops() {
        // Two triangles joined at node 2: degrees are fine but (0,4) has no
        // pair of disjoint paths.
        let e = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)];
        let g = NetworkGraph::new(
            5,
            e.iter().map(|&(u, v)| (NodeId(u), NodeId(v), Rate(1000))),
            RateScale::default(),
        )
        .unwrap();
        let mut rows = vec![vec![Rate::ZERO; 5]; 5];
        rows[0][4] = Rate(10);
        rows[4][0] = Rate(10);
        let t = TargetMatrix::from_rows(&rows).unwrap();
        let out = run(&g, &t, &RouterConfig::new(2, Rate(10))).unwrap();
        assert_eq!(out.stop_reason, StopReason::NoMSet);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = walkthrough();
        let t = TargetMatrix::uniform(5, Rate(200)).unwrap();
        let cfg = RouterConfig::new(2, Rate(10)).with_seed(7);
        let a = Router::new(&g, &t, cfg.clone()).unwrap().with_exec(Exec::Sequential).run();
        let b = Router::new(&g, &t, cfg).unwrap().with_exec(Exec::Parallel).run();
        assert_eq!(a, b);
    }
}
