use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curvflow::{step, DiscreteGeometry, RedistributionStrategy};
use curvflow_bench::{diffusion_system, dumbbell, solver_setup};
use std::hint::black_box;

const SIZES: [usize; 3] = [100, 400, 1600];

fn cyclic_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("cyclic_solve");
    for n in SIZES {
        let (a, rhs) = diffusion_system(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| a.solve(black_box(&rhs)).unwrap())
        });
    }
    group.finish();
}

fn geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometry");
    for n in SIZES {
        let curve = dumbbell(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| DiscreteGeometry::from_curve(black_box(&curve)).unwrap())
        });
    }
    group.finish();
}

fn solver_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for strategy in [
        RedistributionStrategy::Zero,
        RedistributionStrategy::RelativeLocalLength,
        RedistributionStrategy::asymptotic_for(1.0),
    ] {
        for n in SIZES {
            let (state, config) = solver_setup(n, strategy);
            group.bench_with_input(BenchmarkId::new(strategy.label(), n), &n, |b, _| {
                b.iter(|| step(black_box(&state), &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, cyclic_solve, geometry, solver_step);
criterion_main!(benches);
