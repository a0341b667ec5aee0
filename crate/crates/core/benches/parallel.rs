//! Data-parallel kernels against the same calls pinned to one worker.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use framedrep::burau::{verify_relations, RepKind};
use framedrep::kz::{flatness_table, random_point, GammaZero};
use framedrep::monodromy::{monodromy_representation, MonodromySetup, TransportOptions};
use framedrep::par;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn relations(c: &mut Criterion) {
    let mut group = c.benchmark_group("relation_suite");
    for &(n, r) in &[(3, 2), (4, 2)] {
        let id = format!("n{n}_r{r}");
        group.bench_with_input(BenchmarkId::new("rayon", &id), &(n, r), |b, &(n, r)| {
            b.iter(|| black_box(verify_relations(n, r, RepKind::Full).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("sequential", &id), &(n, r), |b, &(n, r)| {
            b.iter(|| par::sequential(|| black_box(verify_relations(n, r, RepKind::Full).unwrap())))
        });
    }
    group.finish();
}

fn flatness(c: &mut Criterion) {
    let mut group = c.benchmark_group("flatness_table");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let point = random_point(&mut rng, &[2, 2], 3.5);
    group.bench_function("rayon", |b| {
        b.iter(|| black_box(flatness_table(&point, 2, GammaZero::Weight).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| black_box(flatness_table(&point, 2, GammaZero::Weight).unwrap())))
    });
    group.finish();
}

fn monodromy(c: &mut Criterion) {
    let mut group = c.benchmark_group("monodromy_generators");
    group.sample_size(10);
    let setup = MonodromySetup {
        n: 2,
        r: 1,
        m: 1,
        lambda: Complex64::new(0.37, 0.0),
        kappa: 3.5,
    };
    let opts = TransportOptions::default();
    group.bench_function("rayon", |b| {
        b.iter(|| black_box(monodromy_representation(&setup, &opts).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| black_box(monodromy_representation(&setup, &opts).unwrap())))
    });
    group.finish();
}

criterion_group!(benches, relations, flatness, monodromy);
criterion_main!(benches);
