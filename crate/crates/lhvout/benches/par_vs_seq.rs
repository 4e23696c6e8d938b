//! Parallel vs sequential kernels. The default build routes the hot loops
//! through rayon; the sequential fallbacks stay compiled either way and are
//! benchmarked side by side here.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lhvout::behaviour::CorrelatorTable;
use lhvout::bounds::{local_bound, local_bound_seq, out_bound, out_bound_seq, BellCoefficients};
use lhvout::fw::{build, fix_marginals, lmo, lmo_heuristic_seq, FwConfig, LmoMode};
use lhvout::quantum::{hemisphere_grid, state_behaviour, werner_state};
use lhvout::verifier::{reconstruct, reconstruct_correlators_seq};

fn random_matrix(m: usize, n: usize, seed: u64) -> BellCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..m * n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    BellCoefficients::new(m, n, entries).unwrap()
}

fn bench_exact_bounds(c: &mut Criterion) {
    let m = random_matrix(20, 8, 1);
    let mut group = c.benchmark_group("local_bound_m20");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| local_bound(black_box(&m)).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| local_bound_seq(black_box(&m)).unwrap()));
    group.finish();

    let mut group = c.benchmark_group("out_bound_m20");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| out_bound(black_box(&m)).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| out_bound_seq(black_box(&m)).unwrap()));
    group.finish();
}

fn bench_heuristic_lmo(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (m, n) = (128, 128);
    let g: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut group = c.benchmark_group("lmo_heuristic_128x128_r32");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| lmo(black_box(&g), m, n, LmoMode::Heuristic, 32, 7).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| lmo_heuristic_seq(black_box(&g), m, n, 32, 7))
    });
    group.finish();
}

fn bench_verifier_accumulation(c: &mut Criterion) {
    // A model with tens of thousands of strategies, as emitted by real runs.
    let set = hemisphere_grid(4, 8, None).unwrap();
    let target = state_behaviour(&werner_state(0.6).unwrap(), &set, &set).unwrap();
    let cfg = FwConfig {
        max_iters: 20_000,
        eps_target: 5e-3,
        lmo_mode: LmoMode::Heuristic,
        restarts: 4,
        seed: 0,
    };
    let model = fix_marginals(&build(&target, &cfg).unwrap().model);
    let mut group = c.benchmark_group(format!("verifier_reconstruct_L{}", model.len()));
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| reconstruct(black_box(&model)).unwrap()));
    group.bench_function("sequential", |b| {
        b.iter(|| reconstruct_correlators_seq(black_box(&model)))
    });
    group.finish();
}

fn bench_fw_build(c: &mut Criterion) {
    let target =
        CorrelatorTable::from_correlator_matrix(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
    let cfg = FwConfig {
        max_iters: 1000,
        eps_target: 1e-6,
        lmo_mode: LmoMode::Exact,
        restarts: 1,
        seed: 0,
    };
    let mut group = c.benchmark_group("fw_build_pr_box");
    group.sample_size(20);
    group.bench_function("exact_lmo", |b| b.iter(|| build(black_box(&target), &cfg).unwrap()));
    group.finish();
}

criterion_group!(
    benches,
    bench_exact_bounds,
    bench_heuristic_lmo,
    bench_verifier_accumulation,
    bench_fw_build
);
criterion_main!(benches);
