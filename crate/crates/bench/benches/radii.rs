use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use numindex_core::constants::{compute_mp, MP_TOL};
use numindex_core::radii::{brute_radius_2d, estimate, Objective, SolverConfig};
use numindex_core::random::{self, stream_rng};
use numindex_core::theorem::{alpha_matrix, certified_radii, sign_pattern_max};
use numindex_core::{Field, LpSpace, Operator};

fn instance(p: f64, m: usize, field: Field) -> (LpSpace, Operator) {
    let mut rng = stream_rng(1, m as u64);
    (random::space(&mut rng, p, m), random::operator(&mut rng, m, field))
}

fn mp(c: &mut Criterion) {
    c.bench_function("compute_mp", |b| b.iter(|| compute_mp(black_box(3.0), MP_TOL).unwrap()));
}

fn solver(c: &mut Criterion) {
    let cfg = SolverConfig::default().with_restarts(16);
    let mut group = c.benchmark_group("estimate");
    for m in [2, 4, 6] {
        let (s, t) = instance(2.5, m, Field::Real);
        for obj in Objective::ALL {
            group.bench_with_input(BenchmarkId::new(format!("{obj:?}"), m), &m, |b, _| {
                b.iter(|| estimate(&s, &t, obj, &cfg, &[]).unwrap())
            });
        }
        let (s, t) = instance(2.5, m, Field::Complex);
        group.bench_with_input(BenchmarkId::new("NumRadius/complex", m), &m, |b, _| {
            b.iter(|| estimate(&s, &t, Objective::NumRadius, &cfg, &[]).unwrap())
        });
    }
    group.finish();
}

fn certificates(c: &mut Criterion) {
    let cfg = SolverConfig::default().with_restarts(16);
    let (s, t) = instance(1.7, 4, Field::Real);
    c.bench_function("certified_radii/m=4", |b| {
        b.iter(|| certified_radii(&s, &t, &cfg).unwrap())
    });

    let mut group = c.benchmark_group("sign_pattern_max");
    for m in [4, 10, 16] {
        let (s, t) = instance(3.0, m, Field::Real);
        let alpha = alpha_matrix(&s, &t).unwrap();
        let a = vec![1.0; m];
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| sign_pattern_max(&s, &a, &alpha).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (s, t) = instance(4.0, 2, Field::Real);
    c.bench_function("brute_radius_2d/1e5", |b| {
        b.iter(|| brute_radius_2d(&s, &t, Objective::NumRadius, 100_000).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = mp, solver, certificates, oracle
}
criterion_main!(benches);
