use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use impartial_core::{
    apwru, apwru_deletion, apwru_pivotal, check_impartial, GraphClassSpec, Mechanism,
};
use std::hint::black_box;

fn single_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("select");
    for n in [8, 16, 32] {
        let g = impartial_core::Digraph::complete(n).unwrap();
        group.bench_with_input(BenchmarkId::new("apwru", n), &g, |b, g| {
            b.iter(|| apwru(black_box(g)))
        });
        group.bench_with_input(BenchmarkId::new("apwru-deletion-k2", n), &g, |b, g| {
            b.iter(|| apwru_deletion(black_box(g), 2).unwrap())
        });
    }
    for n in [6, 10] {
        let g = impartial_core::Digraph::complete(n).unwrap();
        group.bench_with_input(BenchmarkId::new("apwru-pivotal", n), &g, |b, g| {
            b.iter(|| apwru_pivotal(black_box(g)))
        });
    }
    group.finish();
}

fn class_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("impartiality-sweep");
    group.sample_size(10);
    group.bench_function("apwru G_3", |b| {
        let spec = GraphClassSpec::unbounded(3).unwrap();
        b.iter(|| check_impartial(Mechanism::Apwru, spec).unwrap())
    });
    group.bench_function("apwru G_4(1)", |b| {
        let spec = GraphClassSpec::bounded(4, 1).unwrap();
        b.iter(|| check_impartial(Mechanism::Apwru, spec).unwrap())
    });
    group.finish();
}

criterion_group!(benches, single_graph, class_sweep);
criterion_main!(benches);
