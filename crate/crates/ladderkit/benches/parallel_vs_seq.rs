//! Rayon path vs the sequential fallback on the three data-parallel loops:
//! per-eigenvalue bisection, randomized adjointness trials, and ladder
//! construction. Build with `--no-default-features` to time the fallback
//! dispatch on its own.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};

use ladderkit::{
    build_hypergeometric, classical_preset, solve_chain_eigens, solve_chain_eigens_seq,
    verify_adjointness, verify_adjointness_seq, ChainSpec, ChainTolerances, ClassicalFamily, Grid,
    TridiagonalMatrix,
};

fn random_tridiagonal(n: usize, seed: u64) -> TridiagonalMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TridiagonalMatrix::new(diag, off).unwrap()
}

// mu sized so the weight stays normal across the whole window
fn charlier_chain(b: i64, levels: usize) -> ChainSpec {
    let grid = Grid::new(0, b).unwrap();
    let params = classical_preset(ClassicalFamily::Charlier { mu: 20.0 }, grid, levels).unwrap();
    build_hypergeometric(&params, ChainTolerances::default()).unwrap()
}

fn bench_eigensolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigensolve");
    for n in [64usize, 256, 1024] {
        let m = random_tridiagonal(n, 7);
        group.bench_with_input(BenchmarkId::new("parallel", n), &m, |bch, m| {
            bch.iter(|| m.eigenvalues().unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &m, |bch, m| {
            bch.iter(|| m.eigenvalues_seq().unwrap())
        });
    }
    group.finish();
}

fn bench_adjointness(c: &mut Criterion) {
    let chain = charlier_chain(120, 3);
    let mut group = c.benchmark_group("adjointness_trials");
    for trials in [64usize, 512] {
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |bch, &t| {
            bch.iter(|| verify_adjointness(&chain, 2, t, 42).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |bch, &t| {
            bch.iter(|| verify_adjointness_seq(&chain, 2, t, 42).unwrap())
        });
    }
    group.finish();
}

fn bench_ladder(c: &mut Criterion) {
    let chain = charlier_chain(120, 12);
    let mut group = c.benchmark_group("ladder_solve");
    group.bench_function("parallel", |bch| {
        bch.iter(|| solve_chain_eigens(&chain, 12).unwrap())
    });
    group.bench_function("sequential", |bch| {
        bch.iter(|| solve_chain_eigens_seq(&chain, 12).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_eigensolve, bench_adjointness, bench_ladder);
criterion_main!(benches);
