use std::hint::black_box;

use bdris::circuit::reflection;
use bdris::lsap::solve_lsap_max;
use bdris::scenario::synthesize_channels;
use bdris::{CircuitParams, Engine, Network, RMat, Scenario};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lsap(c: &mut Criterion) {
    let mut g = c.benchmark_group("lsap");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [8, 32, 100] {
        let cost = RMat::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        g.bench_with_input(BenchmarkId::from_parameter(m), &cost, |b, cost| b.iter(|| solve_lsap_max(black_box(cost))));
    }
    g.finish();
}

fn reflection_grid(c: &mut Criterion) {
    let p = CircuitParams::default();
    c.bench_function("reflection 64x64", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..64 {
                for j in 0..64 {
                    let f = 3.45e9 + 1.5e6 * i as f64;
                    let cap = p.c_min + (p.c_max - p.c_min) * j as f64 / 63.0;
                    acc += reflection(black_box(f), cap, &p).unwrap().re;
                }
            }
            acc
        })
    });
}

fn synthesis(c: &mut Criterion) {
    let s = Scenario::desk(2, 4, 32, 16, 4).unwrap();
    c.bench_function("channels Q2 N4 M32 K16", |b| b.iter(|| synthesize_channels(black_box(&s)).unwrap()));
}

fn iterate(c: &mut Criterion) {
    let mut g = c.benchmark_group("iterate");
    for m in [16, 32] {
        let s = Scenario::desk(2, 4, m, 8, 4).unwrap();
        let net = Network::from_scenario(&s).unwrap();
        g.bench_function(BenchmarkId::new("M", m), |b| {
            b.iter_batched(
                || Engine::with_network(s.clone(), net.clone()).unwrap(),
                |mut e| e.iterate().unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, lsap, reflection_grid, synthesis, iterate);
criterion_main!(benches);
