use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use spaghetti_bench::wavy_series;
use spaghetti_core::{
    band, build_ensemble, default_grid, fit_least_squares_line, select_lambda_loo, solve_weights,
    FitConfig, KernelBasis,
};

fn bench_solve_weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_weights");
    for n in [6usize, 12, 24] {
        let s = wavy_series(n);
        let line = fit_least_squares_line(s.points()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| solve_weights(black_box(s.points()), line, 1.0, 0.1).unwrap())
        });
    }
    group.finish();
}

fn bench_roughness(c: &mut Criterion) {
    let basis = KernelBasis::new((0..12).map(|i| i as f64).collect(), 1.3).unwrap();
    c.bench_function("roughness_matrix/12", |b| {
        b.iter(|| black_box(&basis).roughness_matrix())
    });
}

fn bench_loo(c: &mut Criterion) {
    let s = wavy_series(7);
    let cfg = FitConfig::default();
    c.bench_function("select_lambda_loo/7", |b| {
        b.iter(|| select_lambda_loo(black_box(&s), 3, &cfg).unwrap())
    });
}

fn bench_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for n in [7usize, 15] {
        let s = wavy_series(n);
        let cfg = FitConfig::default();
        group.bench_with_input(BenchmarkId::new("build", n), &s, |b, s| {
            b.iter(|| build_ensemble(black_box(s), &cfg).unwrap())
        });
        let e = build_ensemble(&s, &cfg).unwrap();
        let xs = default_grid(&s);
        group.bench_with_input(BenchmarkId::new("band", n), &e, |b, e| {
            b.iter(|| band(e, &xs))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_solve_weights,
    bench_roughness,
    bench_loo,
    bench_ensemble
);
criterion_main!(benches);
