use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypersew::fields::{fbm_sheet, weierstrass_field, SheetSpec};
use hypersew::increment::young_pair;
use hypersew::sewing::riemann_sum;
use hypersew::solver::{solve, Coefficient, Problem, SolverOptions};
use hypersew::{Field, GridPartition, HolderExponents, HyperRect};

fn grid(k: usize, cells: usize) -> GridPartition {
    GridPartition::uniform(&HyperRect::unit(k), &vec![cells; k]).unwrap()
}

fn riemann(c: &mut Criterion) {
    let alpha = HolderExponents::uniform(2, 0.7).unwrap();
    let xi = young_pair(weierstrass_field(&alpha, 12), Field::product_identity(2));
    let mut group = c.benchmark_group("riemann_sum");
    for cells in [16, 64, 256] {
        let g = grid(2, cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &g, |b, g| {
            b.iter(|| riemann_sum(black_box(&xi), g))
        });
    }
    group.finish();
}

fn sheet(c: &mut Criterion) {
    let mut group = c.benchmark_group("fbm_sheet");
    group.sample_size(10);
    for n in [16, 32] {
        let spec = SheetSpec::new(vec![0.7, 0.7], grid(2, n), 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| fbm_sheet(black_box(spec)).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let alpha = HolderExponents::uniform(2, 0.75).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for cells in [32, 64] {
        let problem = Problem::new(
            Coefficient::sine(),
            Field::constant(2, 1.0),
            weierstrass_field(&alpha, 9).scale(0.5),
            grid(2, cells),
        )
        .unwrap();
        let options = SolverOptions::with_tol(1e-10);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &problem, |b, p| {
            b.iter(|| solve(p, &[0.5, 0.5], &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, riemann, sheet, solver);
criterion_main!(benches);
