//! Benchmarks of the hot kernels on the curved builtin scenario: the
//! metric connection in the general gauge, the orthonormal spinor
//! connection, the first-order spinor-connection delta, and the stress
//! tensor of a multi-mode field.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spindef_core::dirac_matter::random_spinor_field;
use spindef_core::{
    delta_spin_connection, gamma_general, gamma_orthonormal, spin_connection_orthonormal,
    stress_tensor, ChartPoint, PhysicalConstants, Scenario, SplitMix64,
};

fn bench_kernels(c: &mut Criterion) {
    let scenario = Scenario::builtin("exp-scale-frame").expect("builtin scenario");
    let p: ChartPoint = [0.3, -0.2, 0.5, 0.1];
    let pert = scenario
        .perturbation
        .as_ref()
        .expect("perturbation")
        .clone();
    let commutation = scenario.frame.commutation_coefficients(&p).unwrap();
    let gamma = gamma_orthonormal(&commutation);
    let conn = spin_connection_orthonormal(&gamma);
    let consts = PhysicalConstants::natural();
    let mut rng = SplitMix64::new(7);
    let psi = random_spinor_field(&mut rng, 1.0, 1.0);

    c.bench_function("gamma_general", |b| {
        b.iter(|| gamma_general(&scenario.metric, &scenario.frame, black_box(&p)).unwrap())
    });

    c.bench_function("spin_connection_orthonormal", |b| {
        b.iter(|| spin_connection_orthonormal(black_box(&gamma)))
    });

    c.bench_function("delta_spin_connection", |b| {
        b.iter(|| delta_spin_connection(&pert, &gamma, &scenario.frame, black_box(&p)).unwrap())
    });

    c.bench_function("stress_tensor", |b| {
        b.iter(|| stress_tensor(&psi, &conn, &scenario.frame, &consts, black_box(&p)).unwrap())
    });
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
