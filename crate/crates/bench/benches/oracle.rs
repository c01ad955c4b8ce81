use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasebound::oracle::{apply_channel, qfi_exact, verify_identities, Cutoffs, PhaseConvention};
use phasebound::KrausGaugePoint;
use phasebound_bench::{coherent_state, ecs_state, reference_channel};

fn channel(c: &mut Criterion) {
    let p = reference_channel();
    let mut g = c.benchmark_group("apply_channel");
    for d in [24, 30] {
        let s = coherent_state(d);
        let cut = Cutoffs::for_state(&s, &p).unwrap();
        g.bench_with_input(BenchmarkId::new("single_mode", d), &s, |b, s| {
            b.iter(|| {
                apply_channel(
                    s,
                    &p,
                    0.3,
                    PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
                    black_box(&cut),
                )
            })
        });
    }
    let s = ecs_state(14);
    let cut = Cutoffs::truncated(14).with_budget(1.0);
    g.bench_function("ecs_14_per_mode", |b| {
        b.iter(|| apply_channel(&s, &p, 0.3, PhaseConvention::PhaseFirst, black_box(&cut)))
    });
    g.finish();
}

fn qfi(c: &mut Criterion) {
    let p = reference_channel();
    let s = coherent_state(30);
    let cut = Cutoffs::for_state(&s, &p).unwrap();
    c.bench_function("qfi_exact_coherent_d30", |b| {
        b.iter(|| qfi_exact(black_box(&s), &p, 0.3, &cut))
    });
}

fn identities(c: &mut Criterion) {
    let p = reference_channel();
    let mut g = c.benchmark_group("verify_identities");
    g.sample_size(10);
    g.bench_function("d30", |b| b.iter(|| verify_identities(black_box(&p), 30)));
    g.finish();
}

criterion_group!(benches, channel, qfi, identities);
criterion_main!(benches);
