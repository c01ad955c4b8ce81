use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use phasebound::sweep::run_sweep;
use phasebound::{cq_star_n, cq_star_single, derive_params, ProbeMoments, SweepSpec};

fn optimum(c: &mut Criterion) {
    let p = derive_params(0.4, 1.0).unwrap();
    let single = ProbeMoments::single(1.0, 1.0).unwrap();
    let multi = ProbeMoments::new(2, 0.73, 0.93).unwrap();
    c.bench_function("cq_star_single", |b| {
        b.iter(|| cq_star_single(black_box(&p), black_box(&single)))
    });
    c.bench_function("cq_star_n", |b| {
        b.iter(|| cq_star_n(black_box(&p), black_box(&multi)))
    });
}

fn preset_sweep(c: &mut Criterion) {
    let spec = SweepSpec::ecs_preset();
    c.bench_function("sweep_preset_303_points", |b| {
        b.iter(|| run_sweep(black_box(&spec)))
    });
}

criterion_group!(benches, optimum, preset_sweep);
criterion_main!(benches);
