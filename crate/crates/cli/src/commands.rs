use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

use mpath_core::export::{routing_list_text, write_matrix_csv, write_trace_csv, RoutingListFile};
use mpath_core::io::{load_network, parse_network};
use mpath_core::keysim::{PairStatus, Simulation};
use mpath_core::network::validate as validate_graph;
use mpath_core::paths::{enumerate_m_path_sets, enumerate_simple_paths, set_deficiency};
use mpath_core::routing::sweep;
use mpath_core::{
    EffectiveRateMatrix, Exec, NetworkGraph, NodeId, Router, RouterConfig, RoutingOutcome,
};

use crate::manifest::{Artifact, OutcomeSummary, RunManifest, MANIFEST_FILE};
use crate::{Overrides, RouteArgs, SimulateArgs};

fn apply(cfg: &mut RouterConfig, o: &Overrides, g: &NetworkGraph) -> Result<()> {
    if let Some(dr) = o.delta_r {
        cfg.delta_r = g.scale().from_kbps(dr).context("--delta-r")?;
    }
    if o.r_max.is_some() {
        cfg.r_max = o.r_max;
    }
    if let Some(m) = o.m {
        cfg.m = m;
    }
    if o.hop_limit.is_some() {
        cfg.hop_limit = o.hop_limit;
    }
    cfg.seed = o.seed;
    cfg.check()?;
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn list_nodes(nodes: &[NodeId]) -> String {
    if nodes.is_empty() {
        return "none".into();
    }
    nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn validate(input: &Path, m: Option<usize>, hop_limit: Option<usize>) -> Result<ExitCode> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (g, _, cfg) = parse_network(&text)?;
    let m = m.unwrap_or(cfg.m);
    let mut report = validate_graph(&g, m);
    if report.connected {
        report.check_m_sets(&g, hop_limit.or(cfg.hop_limit));
    }

    println!("nodes: {}, links: {}, M = {m}", g.node_count(), g.edge_count());
    println!("connected: {}", yes_no(report.connected));
    println!("min degree: {}", report.min_degree);
    println!("nodes with degree below M: {}", list_nodes(&report.degree_violations));
    if !report.remote_pairs_without_m_sets.is_empty() {
        let pairs: Vec<String> = report
            .remote_pairs_without_m_sets
            .iter()
            .map(|(i, j)| format!("({i}, {j})"))
            .collect();
        println!("warning: no {m} disjoint paths for {}", pairs.join(", "));
    }
    if report.is_ok() {
        println!("status: ok");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("status: invalid");
        Ok(ExitCode::from(1))
    }
}

fn write_run(
    dir: &Path,
    input: &Path,
    g: &NetworkGraph,
    cfg: &RouterConfig,
    o: &RoutingOutcome,
) -> Result<RunManifest> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let scale = g.scale();
    let mut artifacts = Vec::new();
    let mut create = |kind: &str, name: &str| -> Result<BufWriter<File>> {
        artifacts.push(Artifact {
            kind: kind.into(),
            path: name.into(),
        });
        let path = dir.join(name);
        Ok(BufWriter::new(
            File::create(&path).with_context(|| format!("writing {}", path.display()))?,
        ))
    };

    use std::io::Write;
    create("routing_list_text", "routing_list.txt")?.write_all(routing_list_text(&o.routing_list, scale).as_bytes())?;
    let mut w = create("routing_list_json", "routing_list.json")?;
    serde_json::to_writer_pretty(&mut w, &RoutingListFile::new(&o.routing_list, scale))?;
    writeln!(w)?;
    write_matrix_csv(&o.effective, scale, create("effective_matrix_csv", "effective_matrix.csv")?)?;
    write_matrix_csv(
        &EffectiveRateMatrix::from_graph(g),
        scale,
        create("initial_matrix_csv", "initial_matrix.csv")?,
    )?;
    write_trace_csv(&o.trace, scale, create("trace_csv", "trace.csv")?)?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: input.to_path_buf(),
        resolution_bps: scale.resolution_bps,
        config: cfg.clone(),
        seed: cfg.seed,
        outcome: OutcomeSummary::new(o, scale.format_kbps(o.final_delta)),
        artifacts,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("writing {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    Ok(manifest)
}

fn parse_sweep(spec: &str, default_seed: u64) -> Result<Vec<(f64, u64)>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (dr, seed) = match item.split_once('@') {
                Some((dr, seed)) => (dr, seed.parse().with_context(|| format!("sweep seed in {item:?}"))?),
                None => (item, default_seed),
            };
            Ok((dr.parse().with_context(|| format!("sweep delta_r in {item:?}"))?, seed))
        })
        .collect()
}

pub fn route(args: &RouteArgs) -> Result<ExitCode> {
    let (input, g, t, cfg) = if let Some(mpath) = &args.manifest {
        let text = fs::read_to_string(mpath).with_context(|| format!("reading {}", mpath.display()))?;
        let m: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
        let (g, t, _) = load_network(&m.input)?;
        if g.scale().resolution_bps != m.resolution_bps {
            bail!("network resolution changed since the manifest was written");
        }
        (m.input, g, t, m.config)
    } else {
        let input = args.input.clone().expect("required by clap");
        let (g, t, mut cfg) = load_network(&input)?;
        // Absolute, so the manifest can be replayed from any directory.
        let input = fs::canonicalize(&input).unwrap_or(input);
        apply(&mut cfg, &args.overrides, &g)?;
        (input, g, t, cfg)
    };
    let scale = g.scale();

    let Some(spec) = &args.sweep else {
        let o = Router::new(&g, &t, cfg.clone())?.run();
        write_run(&args.out_dir, &input, &g, &cfg, &o)?;
        println!(
            "{} iterations, delta {} kbit/s, stop {}, {} records",
            o.iterations,
            scale.format_kbps(o.final_delta),
            o.stop_reason,
            o.routing_list.len()
        );
        println!("artifacts in {}", args.out_dir.display());
        return Ok(ExitCode::SUCCESS);
    };

    let runs = parse_sweep(spec, cfg.seed)?;
    if runs.is_empty() {
        bail!("--sweep lists no runs");
    }
    let configs = runs
        .iter()
        .map(|&(dr, seed)| {
            let mut c = cfg.clone();
            c.delta_r = scale.from_kbps(dr).with_context(|| format!("sweep delta_r {dr}"))?;
            c.seed = seed;
            c.check()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = sweep(&g, &t, &configs, Exec::default())?;

    fs::create_dir_all(&args.out_dir)?;
    let mut summary = vec!["delta_r,seed,iterations,final_delta,stop_reason,dir".to_string()];
    for (c, o) in configs.iter().zip(&outcomes) {
        let name = format!("dr{}_seed{}", scale.format_kbps(c.delta_r), c.seed);
        write_run(&args.out_dir.join(&name), &input, &g, c, o)?;
        let row = format!(
            "{},{},{},{},{},{name}",
            scale.format_kbps(c.delta_r),
            c.seed,
            o.iterations,
            scale.format_kbps(o.final_delta),
            o.stop_reason
        );
        println!("{row}");
        summary.push(row);
    }
    fs::write(args.out_dir.join("sweep_summary.csv"), summary.join("\n") + "\n")?;
    Ok(ExitCode::SUCCESS)
}

pub fn paths(input: &Path, i: usize, j: usize, m: Option<usize>, hop_limit: Option<usize>) -> Result<ExitCode> {
    let (g, t, cfg) = load_network(input)?;
    let m = m.unwrap_or(cfg.m);
    let hop_limit = hop_limit.or(cfg.hop_limit);
    if i == j || !g.contains(NodeId(i)) || !g.contains(NodeId(j)) {
        bail!("({i}, {j}) is not a pair of distinct nodes of the network");
    }
    let (a, b) = (NodeId(i), NodeId(j));
    let eff = EffectiveRateMatrix::from_graph(&g);
    let scale = g.scale();

    let simple = enumerate_simple_paths(&g, a, b, hop_limit);
    println!("P_{i}{j}: {} simple paths", simple.len());
    for p in &simple {
        println!("    {p}");
    }
    let sets = enumerate_m_path_sets(&simple, m);
    println!("L^{m}_{i}{j} = [");
    for s in &sets {
        let d = set_deficiency(s, |u, v| t.get(u, v) - eff.get(u, v));
        println!("    {s}, D = {}, hops = {}", scale.format_kbps(d), s.total_hops());
    }
    println!("]");
    if sets.is_empty() {
        println!("notice: no set of {m} internally disjoint paths joins {i} and {j}");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let (g, t, mut cfg) = load_network(&args.input)?;
    apply(&mut cfg, &args.overrides, &g)?;
    let list = match &args.routing {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: RoutingListFile = serde_json::from_str(&text).context("parsing routing list")?;
            file.into_list(&g)?
        }
        None => Router::new(&g, &t, cfg.clone())?.run().routing_list,
    };
    let eff = list.effective_rates(&g)?;
    let compromised: BTreeSet<NodeId> = args.compromise.iter().map(|&v| NodeId(v)).collect();
    if let Some(v) = compromised.iter().find(|v| !g.contains(**v)) {
        bail!("compromised node {v} is not in the network");
    }
    if let Some(e) = args.epsilon {
        if !(0.0..=1.0).contains(&e) {
            bail!("--epsilon must lie in [0, 1]");
        }
    }

    let sim = Simulation::run(&g, &list, &eff, args.tau, cfg.seed, Exec::default())?;
    let report = sim.report(&compromised, args.epsilon);

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "tau = {} s, {} records, {} pairs, compromised: {}",
        args.tau,
        list.len(),
        report.pairs.len(),
        list_nodes(&compromised.iter().copied().collect::<Vec<_>>())
    );
    println!("{:<10} {:<7} {:>12} {:>6}  status", "pair", "kind", "bits", "agree");
    for p in &report.pairs {
        let status = if p.direct {
            if compromised.contains(&p.pair.0) || compromised.contains(&p.pair.1) {
                "endpoint_compromised"
            } else {
                "-"
            }
        } else {
            match report.compromise.pair(p.pair.0, p.pair.1).map(|e| e.status) {
                Some(PairStatus::Secure) => "secure",
                Some(PairStatus::PartiallyLeaked) => "partially_leaked",
                Some(PairStatus::FullyLeaked) => "fully_leaked",
                None => "-",
            }
        };
        println!(
            "{:<10} {:<7} {:>12} {:>6}  {status}",
            format!("({}, {})", p.pair.0, p.pair.1),
            if p.direct { "direct" } else { "remote" },
            p.bits_at_low,
            yes_no(p.agree),
        );
    }
    if args.dump_keys {
        for (pair, k) in sim.direct_keys.iter().chain(&sim.remote_keys) {
            let mut bits = k.at_low.bits.clone();
            bits.set_uninitialized(false);
            println!("key ({}, {}) {}", pair.0, pair.1, hex::encode(bits.as_raw_slice()));
        }
    }
    if let Some(bound) = report.compromise.bound {
        println!("per-record leak bound: {bound:.6}");
    }

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)?;
        let path: PathBuf = dir.join("simulation_report.json");
        fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let ok = report.all_agree && report.lengths_ok && report.oracle_mismatches.is_empty();
    println!("keys agree: {}", yes_no(report.all_agree));
    if !report.oracle_mismatches.is_empty() {
        println!("leak analysis disagrees with reconstruction on records {:?}", report.oracle_mismatches);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn is_validation_failure(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<mpath_core::Error>(),
        Some(mpath_core::Error::Disconnected | mpath_core::Error::DegreeTooLow { .. })
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec() {
        assert_eq!(parse_sweep("0.1@3, 0.05,0.01@0", 7).unwrap(), vec![(0.1, 3), (0.05, 7), (0.01, 0)]);
        assert!(parse_sweep("0.1@x", 0).is_err());
        assert!(parse_sweep("fast", 0).is_err());
        assert!(parse_sweep("", 0).unwrap().is_empty());
    }
}
