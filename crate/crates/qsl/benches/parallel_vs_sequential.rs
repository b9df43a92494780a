//! Replicate fan-out: rayon pool (default feature) versus the sequential
//! path, on the two workloads the harness actually runs. With
//! `--no-default-features` both groups measure the sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qsl::exec::{map_jobs, map_jobs_seq, mix_seed};
use qsl::{dqs, pqs, PosteriorGrid, ProbSearchConfig, StepOracle};

fn dqs_job(theta_idx: &usize) -> f64 {
    let theta = (*theta_idx as f64 + 0.5) / 512.0;
    let mut oracle = StepOracle::new(theta, 0.0, 1).expect("valid oracle");
    dqs(&mut oracle, 5.0, 1e-4, 0.0).expect("search runs").distance()
}

fn pqs_job(job: &(usize, usize)) -> f64 {
    let (theta_idx, rep) = *job;
    let theta = (theta_idx as f64 + 0.5) / 16.0;
    let seed = mix_seed(1, theta_idx as u64, rep as u64, 0);
    let mut oracle = StepOracle::new(theta, 0.1, seed).expect("valid oracle");
    let config = ProbSearchConfig::new(5.0, 0.1).expect("valid config");
    let prior = PosteriorGrid::uniform(config.delta).expect("valid prior");
    pqs(&mut oracle, &config, prior).expect("search runs").distance()
}

fn bench_dqs_theta_sweep(c: &mut Criterion) {
    let jobs: Vec<usize> = (0..512).collect();
    let mut group = c.benchmark_group("dqs_theta_sweep");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(map_jobs(black_box(&jobs), dqs_job)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_jobs_seq(black_box(&jobs), dqs_job)))
    });
    group.finish();
}

fn bench_pqs_replicates(c: &mut Criterion) {
    let jobs: Vec<(usize, usize)> = (0..16)
        .flat_map(|t| (0..8).map(move |r| (t, r)))
        .collect();
    let mut group = c.benchmark_group("pqs_replicates");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(map_jobs(black_box(&jobs), pqs_job)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_jobs_seq(black_box(&jobs), pqs_job)))
    });
    group.finish();
}

criterion_group!(benches, bench_dqs_theta_sweep, bench_pqs_replicates);
criterion_main!(benches);
