use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use infosubs_bench::ci_context;
use infosubs_core::classify::{classify_weak, DEFAULT_TOL};
use infosubs_core::select::{greedy_select, greedy_select_naive, ValueOracle};
use infosubs_core::{ExpectedScoreFunction as G, SignalSet};

fn value_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("value_exact");
    for n in [4, 8, 12] {
        let ctx = ci_context(n, G::Log);
        let all = SignalSet::full(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| ctx.value_subset(black_box(all)).unwrap())
        });
    }
    group.finish();
}

fn classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_weak");
    group.sample_size(10);
    for n in [3, 5, 7] {
        let ctx = ci_context(n, G::Quadratic);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| classify_weak(black_box(&ctx), DEFAULT_TOL, 10).unwrap())
        });
    }
    group.finish();
}

fn greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy");
    group.sample_size(10);
    let ctx = ci_context(10, G::Log);
    for k in [2, 4] {
        group.bench_with_input(BenchmarkId::new("lazy", k), &k, |b, &k| {
            b.iter(|| greedy_select(&ValueOracle::new(&ctx), k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("naive", k), &k, |b, &k| {
            b.iter(|| greedy_select_naive(&ValueOracle::new(&ctx), k).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, value_exact, classify, greedy);
criterion_main!(benches);
