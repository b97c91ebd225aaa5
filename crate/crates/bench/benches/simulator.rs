use std::hint::black_box;

use criterion::*;
use photovqe::experiments::{pca_project, random_start};
use photovqe::linalg::hermitian_eigen;
use photovqe::schwinger::build_schwinger;
use photovqe::seeding::stream_rng;
use photovqe::spsa::run_vqe;
use photovqe::*;

fn bench_energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy");
    let h = build_schwinger(&SchwingerConfig::two_qubit(0.0)).unwrap();
    let theta = ParamVector([0.4, 1.1, 0.3, 2.0, 0.9, 1.7]);
    let noisy = NoiseConfig::new(NoiseMode::Both, 0.4).unwrap();
    for (name, shots, noise) in [
        ("exact", Shots::Exact, NoiseConfig::none()),
        ("shots_1000", Shots::Count(1000), NoiseConfig::none()),
        ("shots_1000_noisy", Shots::Count(1000), noisy),
    ] {
        let est = EnergyEstimator::new(&h, shots, noise).unwrap();
        let mut rng = stream_rng(1, 0);
        group.bench_function(name, |b| {
            b.iter(|| est.estimate(black_box(&theta), &mut rng).unwrap())
        });
    }
    group.finish();
}

fn bench_trial(c: &mut Criterion) {
    let problem = VqeProblem::new(-8.0, Shots::Count(1000), NoiseConfig::none()).unwrap();
    let meta = SpsaMeta::default();
    c.bench_function("vqe_trial_500_iterations", |b| {
        b.iter(|| {
            run_vqe(&problem, random_start(7), 500, &meta, 7)
                .unwrap()
                .energy
        })
    });
}

fn bench_linalg(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobi");
    for n in [2usize, 4] {
        let h = build_schwinger(&SchwingerConfig::new(n, 0.3))
            .unwrap()
            .to_matrix()
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(1 << n), &h, |b, h| {
            b.iter(|| hermitian_eigen(black_box(h)).unwrap())
        });
    }
    group.finish();

    let points: Vec<ParamVector> = (0..10_000).map(random_start).collect();
    let energies = vec![0.0; points.len()];
    c.bench_function("pca_10000_points", |b| {
        b.iter(|| pca_project(black_box(&points), &energies).unwrap())
    });
}

criterion_group!(benches, bench_energy, bench_trial, bench_linalg);
criterion_main!(benches);
