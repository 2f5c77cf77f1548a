//! Single-thread versus default rayon pool on the main workloads.
//!
//! Built without the `parallel` feature both pools run the sequential
//! fallback, which gives the baseline for the feature itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use spillover_core::analysis::{linspace, sweep};
use spillover_core::equilibrium::{solve, verify, SolveOptions};
use spillover_core::funcexpr::ParamMap;
use spillover_core::model::{make_family, ContestConfig, Player};
use spillover_core::vie::{solve_density_matrix, solve_density_picard, DEFAULT_MAX_ITER, DEFAULT_TOL};
use spillover_core::Grid;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn woa() -> spillover_core::ContestSpec {
    let params: ParamMap = [("f1_0", 1.0), ("f2_0", 2.0), ("delta", 0.1)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    make_family("woa_costly_prep", &params).unwrap()
}

fn bench_solvers(c: &mut Criterion) {
    let spec = woa();
    let grid = Grid::new(2000, 6.0).unwrap();
    let mut group = c.benchmark_group("density");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("matrix", name), &grid, |b, g| {
            b.iter(|| pool.install(|| solve_density_matrix(&spec, Player::One, g).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("picard", name), &grid, |b, g| {
            b.iter(|| pool.install(|| solve_density_picard(&spec, Player::One, g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap()))
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let eq = solve(&woa(), &SolveOptions::default()).unwrap();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| b.iter(|| pool.install(|| verify(&eq, 5e-3).unwrap())));
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = ContestConfig::from_json_str(r#"{"family": "logistic_spillover", "params": {"lambda": 0}}"#).unwrap();
    let values = linspace(0.0, 4.0, 16).unwrap();
    let opts = SolveOptions { grid_n: 1000, ..Default::default() };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| b.iter(|| pool.install(|| sweep(&cfg, "lambda", &values, &opts).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, bench_solvers, bench_verify, bench_sweep);
criterion_main!(benches);
