//! Core workloads run on one thread and on the full rayon pool. Without the
//! `parallel` feature only the sequential group is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use unitdist::cayley_menger::verify_lemma1_samples;
use unitdist::density::{approx_distance, Target};
use unitdist::embed::embed;
use unitdist::rational::rat;
use unitdist::witness::{build_witness, derive_membership};

fn identity_samples() {
    black_box(verify_lemma1_samples(6, 200, 0));
}

fn density_scan() {
    let t: Target = "sqrt(2)".parse().unwrap();
    black_box(approx_distance(3, &t, &rat(1, 10_000), 10_000).unwrap());
}

fn witness_build_and_embed() {
    let g = build_witness(&derive_membership(3, 2, 1).unwrap()).unwrap();
    black_box(embed(&g, 0).unwrap());
}

const WORKLOADS: [(&str, fn()); 3] = [
    ("identity_samples", identity_samples),
    ("density_scan", density_scan),
    ("witness_build_and_embed", witness_build_and_embed),
];

#[cfg(feature = "parallel")]
fn bench(c: &mut Criterion) {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    let mut group = c.benchmark_group("core");
    group.sample_size(10);
    for (name, f) in WORKLOADS {
        group.bench_function(BenchmarkId::new("sequential", name), |b| {
            b.iter(|| one.install(f))
        });
        group.bench_function(
            BenchmarkId::new(format!("parallel-{}", all.current_num_threads()), name),
            |b| b.iter(|| all.install(f)),
        );
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("core");
    group.sample_size(10);
    for (name, f) in WORKLOADS {
        group.bench_function(BenchmarkId::new("sequential", name), |b| b.iter(f));
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
