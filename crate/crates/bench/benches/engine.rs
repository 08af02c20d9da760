use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use handoff_bench::{overlay, scores};
use handoff_core::metrics::compute_metrics;
use handoff_core::simulator::run_prepared;
use handoff_core::AvailableNetworkList;

fn ranking(c: &mut Criterion) {
    let mut g = c.benchmark_group("anl_rank");
    for n in [8, 64, 512] {
        let s = scores(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| AvailableNetworkList::from_pairs(black_box(s), 0).unwrap())
        });
    }
    g.finish();
}

fn engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_overlay_10s");
    g.sample_size(10);
    for terminals in [1, 10, 50] {
        let prepared = overlay(terminals, 10_000).prepare().unwrap();
        g.throughput(Throughput::Elements(terminals as u64 * 100));
        g.bench_with_input(BenchmarkId::from_parameter(terminals), &prepared, |b, p| {
            b.iter(|| run_prepared(black_box(p)).unwrap())
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let trace = run_prepared(&overlay(10, 10_000).prepare().unwrap()).unwrap();
    c.bench_function("compute_metrics_10_terminals", |b| {
        b.iter(|| compute_metrics(black_box(&trace), 10_000).unwrap())
    });
}

criterion_group!(benches, ranking, engine, metrics);
criterion_main!(benches);
