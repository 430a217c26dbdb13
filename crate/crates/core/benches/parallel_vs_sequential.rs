use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mpath_core::io::load_network;
use mpath_core::keysim::{accumulate_pools, Simulation};
use mpath_core::routing::sweep;
use mpath_core::{Exec, Rate, Router, RouterConfig};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn bench_sweep(c: &mut Criterion) {
    let (g, t, cfg) = load_network(data("ten_node.json")).unwrap();
    let configs: Vec<RouterConfig> = (0..8)
        .map(|seed| RouterConfig {
            delta_r: Rate(50),
            ..cfg.clone()
        }
        .with_seed(seed))
        .collect();
    let mut group = c.benchmark_group("sweep_ten_node_8_seeds");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| sweep(&g, &t, black_box(&configs), exec).unwrap()));
    }
    group.finish();
}

fn bench_single_run(c: &mut Criterion) {
    let (g, t, cfg) = load_network(data("ten_node.json")).unwrap();
    let cfg = RouterConfig {
        delta_r: Rate(50),
        ..cfg
    };
    let mut group = c.benchmark_group("route_ten_node_candidate_scoring");
    group.sample_size(10);
    for (name, exec) in MODES {
        let router = Router::new(&g, &t, cfg.clone()).unwrap().with_exec(exec);
        group.bench_function(name, |b| b.iter(|| black_box(router.run())));
    }
    group.finish();
}

fn bench_keysim(c: &mut Criterion) {
    let (g, t, cfg) = load_network(data("six_node.json")).unwrap();
    let o = Router::new(&g, &t, cfg).unwrap().run();
    let mut group = c.benchmark_group("keysim_six_node");
    group.sample_size(20);
    for tau in [100.0, 1000.0] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("pools/{name}"), tau), &tau, |b, &tau| {
                b.iter(|| accumulate_pools(&g, tau, 7, exec).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("round/{name}"), tau), &tau, |b, &tau| {
                b.iter(|| Simulation::run(&g, &o.routing_list, &o.effective, tau, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_single_run, bench_keysim);
criterion_main!(benches);
