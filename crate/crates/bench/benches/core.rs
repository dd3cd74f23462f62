use std::hint::black_box;

use bfmimo_core::apod::sample_kernel_matrix;
use bfmimo_core::outage::{capacity_distribution, miso_grid_envelope, polytope_envelope_search, SearchOptions};
use bfmimo_core::{ApodSpectrum, ArrayLayout, CorrelationKernel, MimoConfig, PowerAllocation};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectra(c: &mut Criterion) {
    let mut g = c.benchmark_group("apod_spectrum");
    let kernel = CorrelationKernel::broadside(1.0).unwrap();
    for k in [18, 72, 180] {
        let layout = ArrayLayout::in_decorrelations(k, k as f64 / 18.0, &kernel).unwrap();
        g.bench_with_input(BenchmarkId::new("broadside", k), &layout, |b, l| {
            b.iter(|| ApodSpectrum::compute(&kernel, black_box(l)).unwrap())
        });
    }
    let steered = CorrelationKernel::new(1.0, 3.0, 1.0).unwrap();
    let layout = ArrayLayout::in_decorrelations(36, 2.0, &steered).unwrap();
    g.bench_function("hermitian/36", |b| b.iter(|| ApodSpectrum::compute_hermitian(&steered, black_box(&layout))));
    g.bench_function("kernel_matrix/180", |b| {
        let l = ArrayLayout::in_decorrelations(180, 10.0, &kernel).unwrap();
        b.iter(|| sample_kernel_matrix(&kernel, black_box(&l)))
    });
    g.finish();
}

fn capacity(c: &mut Criterion) {
    let mut g = c.benchmark_group("capacity_distribution");
    g.sample_size(10);
    let nu = vec![13.313, 2.495, 0.822, 0.394];
    for n in [1, 4] {
        let config = MimoConfig::new(n, nu.clone(), 1.0, 0.1).unwrap();
        let alloc = PowerAllocation::uniform(4).unwrap();
        g.bench_with_input(BenchmarkId::new("10k_trials_4_modes", n), &config, |b, cfg| {
            b.iter(|| capacity_distribution(cfg, &alloc, 10_000, 1).unwrap())
        });
    }
    g.finish();
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("envelope_search");
    g.sample_size(10);
    let miso = MimoConfig::new(1, vec![5.24, 3.63], 1.0, 0.1).unwrap();
    g.bench_function("miso_grid_10pct_10k", |b| b.iter(|| miso_grid_envelope(&miso, 0.1, 10_000, 1).unwrap()));
    let mimo = MimoConfig::new(4, vec![13.313, 2.495, 0.822, 0.394], 1.0, 0.1).unwrap();
    let opts = SearchOptions { candidates: 50, trials: 2000, rounds: 2, shrink: 0.3, holdout_trials: 5000, seed: 1 };
    g.bench_function("polytope_4x4_small", |b| b.iter(|| polytope_envelope_search(&mimo, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, spectra, capacity, search);
criterion_main!(benches);
