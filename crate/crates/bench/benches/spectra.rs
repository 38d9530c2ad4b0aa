use criterion::{black_box, criterion_group, criterion_main, Criterion};

use noneq_bench::{driven_pair, grid, mixing, vee};
use noneq_core::{
    build_liouvillian, chi3_pathway_fwm, driven_signal, linear_signal, rotating_propagator,
    steady_state, ChirpedGaussianPulse,
};

fn linear_trace(c: &mut Criterion) {
    let (system, rho0, pulse) = vee();
    let omega = grid(0.6, 0.9, 301);
    c.bench_function("linear trace, 301 points", |b| {
        b.iter(|| linear_signal(&system, &rho0, &pulse, black_box(&omega), 0.004).unwrap())
    });
}

fn mixing_trace(c: &mut Criterion) {
    let scenario = mixing();
    let omega = grid(0.8, 1.9, 1101);
    c.bench_function("third-order mixing trace, 1101 points", |b| {
        b.iter(|| chi3_pathway_fwm(&scenario, black_box(&omega)).unwrap())
    });
}

fn driven_steady_state(c: &mut Criterion) {
    let driven = driven_pair();
    c.bench_function("steady state of the driven pair", |b| {
        b.iter(|| steady_state(&build_liouvillian(black_box(&driven)).unwrap()).unwrap())
    });
}

fn propagator_sweep(c: &mut Criterion) {
    let liouvillian = build_liouvillian(&driven_pair()).unwrap();
    let omega = grid(0.9, 1.1, 201);
    c.bench_function("resolvent over 201 frequencies", |b| {
        b.iter(|| {
            for &nu in black_box(&omega) {
                rotating_propagator(&liouvillian, nu, 1e-3).unwrap();
            }
        })
    });
}

fn driven_trace(c: &mut Criterion) {
    let driven = driven_pair();
    let pulse = ChirpedGaussianPulse::from_fs_width(1.0, 0.14, 0.5, 0.0).unwrap();
    let omega = grid(0.9, 1.1, 201);
    c.bench_function("driven spectrum, 201 points", |b| {
        b.iter(|| driven_signal(&driven, &pulse, black_box(&omega), 0.0).unwrap())
    });
}

criterion_group!(
    benches,
    linear_trace,
    mixing_trace,
    driven_steady_state,
    propagator_sweep,
    driven_trace
);
criterion_main!(benches);
