use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use subsonic_bench::{converged, options, reference_profile, ALPHA};
use subsonic_core::continuation_solve;
use subsonic_core::solver::assemble_weak_residual;

fn solve(c: &mut Criterion) {
    let b = reference_profile();
    let mut group = c.benchmark_group("continuation_solve");
    group.sample_size(10);
    for cells in [200, 400] {
        let opts = options(cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &opts, |bench, opts| {
            bench.iter(|| continuation_solve(black_box(&b), ALPHA, opts).unwrap())
        });
    }
    group.finish();
}

fn residual(c: &mut Criterion) {
    let b = reference_profile();
    let sol = converged(400);
    let state = sol.state();
    let samples = b.sample(sol.x());
    c.bench_function("weak_residual/400", |bench| {
        bench.iter(|| assemble_weak_residual(black_box(&state), &samples, sol.alpha, &sol.grid).unwrap())
    });
}

criterion_group!(benches, solve, residual);
criterion_main!(benches);
