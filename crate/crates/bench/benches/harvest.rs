use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use harvest_bench::{graph, grown_state};
use harvest_core::features::FeatureExtractor;
use harvest_core::harness::{run_harvest, RunConfig};
use harvest_core::heuristics::{as_propagate, PropagationConfig};

fn features(c: &mut Criterion) {
    let s = grown_state(graph(2000), 150);
    c.bench_function("features/border rows, cold cache", |b| {
        b.iter_batched(FeatureExtractor::new, |mut fx| fx.border_rows(&s), BatchSize::SmallInput)
    });
    let mut fx = FeatureExtractor::new();
    fx.border_rows(&s);
    c.bench_function("features/border rows, warm cache", |b| b.iter(|| fx.border_rows(&s)));
}

fn propagation(c: &mut Criterion) {
    let s = grown_state(graph(2000), 150);
    let cfg = PropagationConfig::default();
    c.bench_function("propagation/cold start", |b| b.iter(|| as_propagate(&s, &cfg).unwrap()));
}

fn runs(c: &mut Criterion) {
    let g = graph(1000);
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    for strategy in ["standalone:mod", "standalone:ewls", "d3ts"] {
        let mut cfg = RunConfig::default();
        cfg.set("strategy", strategy).unwrap();
        cfg.set("budget", "60").unwrap();
        cfg.set("rf.trees", "20").unwrap();
        group.bench_function(strategy, |b| b.iter(|| run_harvest(&cfg, g.clone(), 1).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, features, propagation, runs);
criterion_main!(benches);
