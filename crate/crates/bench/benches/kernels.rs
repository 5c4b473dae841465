use criterion::{criterion_group, criterion_main, Criterion};
use hybrid_teleport::channel_gen::GenerationConfig;
use hybrid_teleport::optics::displacement_matrix;
use hybrid_teleport::*;
use std::hint::black_box;

fn qubit() -> Qubit {
    Qubit::single_rail(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))
}

fn optics(c: &mut Criterion) {
    let state = tensor(&coherent_state(Complex64::new(1.0, 0.0), 24).unwrap(), &qubit().to_fock());
    let bs = BeamSplitter::new(0.99f64.sqrt(), 0, 1).unwrap();
    c.bench_function("beam_splitter/coherent_x_qubit", |b| {
        b.iter(|| apply_beam_splitter(black_box(&state), &bs).unwrap())
    });
    c.bench_function("displacement_matrix/cutoff24", |b| {
        b.iter(|| displacement_matrix(black_box(Complex64::new(0.3, 0.1)), 24))
    });
    let q = qubit().to_fock().with_cutoff(0, 20).unwrap();
    c.bench_function("displacement/qubit_cutoff20", |b| {
        b.iter(|| apply_displacement(black_box(&q), 0, Complex64::new(0.3, 0.0)).unwrap())
    });
}

fn protocol(c: &mut Criterion) {
    let q = qubit();
    c.bench_function("omega_apply", |b| b.iter(|| omega_apply(black_box(&q), 0.1, 0.3, 24).unwrap()));
    let state = omega_apply(&q, 0.1, 0.3, 24).unwrap();
    c.bench_function("alice_measure/ideal_parity", |b| {
        b.iter(|| alice_measure(black_box(&state), MeasurementModel::IdealParity, 8).unwrap())
    });
    let channel = build_channel(0.3, 24).unwrap();
    c.bench_function("alice_mix_exact", |b| {
        b.iter(|| alice_mix_exact(black_box(&channel), &q, 0.99f64.sqrt()).unwrap())
    });
}

fn generation(c: &mut Criterion) {
    let cfg = GenerationConfig::balanced(0.03, 0.99f64.sqrt(), 16).unwrap();
    let mut group = c.benchmark_group("generate_channel");
    group.sample_size(10);
    group.bench_function("alpha0.03_cutoff16", |b| b.iter(|| generate_channel(black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, optics, protocol, generation);
criterion_main!(benches);
