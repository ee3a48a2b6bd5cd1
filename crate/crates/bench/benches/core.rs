use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use distid_core::{
    enumerate_cycles, log_likelihood_matrix, ml_decode, pairwise_sum, DistributionFamily,
    LogLikelihoodMatrix, McEngine, ObservationBatch, Seed,
};

fn decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("ml_decode");
    for a in [4usize, 16, 64] {
        let family = DistributionFamily::random_simplex(a, 8, Seed(1)).unwrap();
        let batch = ObservationBatch::sample(&family, 50, Seed(2)).unwrap();
        let matrix: LogLikelihoodMatrix = log_likelihood_matrix(&batch, &family).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(a), &matrix, |b, m| {
            b.iter(|| ml_decode(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn cycles(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_cycles");
    for (k, r) in [(7usize, 5usize), (8, 8), (9, 7)] {
        group.bench_function(format!("k{k}_r{r}"), |b| {
            b.iter(|| enumerate_cycles(black_box(k), black_box(r)).unwrap().len())
        });
    }
    group.finish();
}

fn criterion_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_sum");
    for a in [8usize, 64, 141] {
        let family = DistributionFamily::equidistant(a, 0.02).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(a), &family, |b, f| {
            b.iter(|| pairwise_sum(black_box(f), 100).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let family = DistributionFamily::binary_grid(4, 0.1, 0.9).unwrap();
    let engine = McEngine::new(0).unwrap();
    let mut group = c.benchmark_group("mc");
    group.sample_size(10);
    group.bench_function("binary_grid_A4_n40_10k_trials", |b| {
        b.iter(|| {
            engine
                .estimate_error_prob(&family, 40, 10_000, Seed(3))
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, decode, cycles, criterion_sum, monte_carlo);
criterion_main!(benches);
