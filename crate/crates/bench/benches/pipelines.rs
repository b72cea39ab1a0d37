//! End-to-end pipeline costs: a full trotterized run, one optimizer sweep's
//! worth of propagation, and the gap-profile construction.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdfs_core::aqc::{gap_profile, gap_schedule, logical_initial_h, xxx_ground_state};
use qdfs_core::krotov::{gradient, ControlProblem};
use qdfs_core::trotter::{oracle_operator, schedule_coeffs, trotter_evolve_prepared};
use qdfs_core::{Space, spinlab::Propagator};
use std::hint::black_box;

fn bench_trotter_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("trotter-run");
    group.sample_size(20);
    for nl in [5usize, 7] {
        let t = 225.0 * 2.0f64.powf((nl as f64 - 7.0) / 2.0);
        let m = (2.0 * t).round() as usize;
        let space = Space::Logical(nl);
        let prop_i = Propagator::qubit_rotations(space, -1.0, 2.0).unwrap();
        let prop_f = Propagator::new(&oracle_operator(space, 3).unwrap()).unwrap();
        let hi = logical_initial_h(nl, 1.0).unwrap();
        let hf = oracle_operator(space, 3).unwrap();
        let profile = gap_profile(&hi, &hf, 256).unwrap();
        let schedule = gap_schedule(&profile, t, m).unwrap();
        let plan = schedule_coeffs(&schedule);
        let psi0 = xxx_ground_state(nl).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nl), &nl, |b, _| {
            b.iter(|| {
                trotter_evolve_prepared(&prop_i, &prop_f, black_box(&plan), &psi0).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_gradient_pass(c: &mut Criterion) {
    let mut group = c.benchmark_group("adjoint-gradient");
    group.sample_size(20);
    for nl in [5usize, 6] {
        let t = 225.0 * 2.0f64.powf((nl as f64 - 7.0) / 2.0);
        let m = (2.0 * t).round() as usize;
        let problem = ControlProblem::new(nl, 3).unwrap();
        let hi = logical_initial_h(nl, 1.0).unwrap();
        let hf = oracle_operator(problem.space(), 3).unwrap();
        let profile = gap_profile(&hi, &hf, 256).unwrap();
        let schedule = gap_schedule(&profile, t, m).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nl), &nl, |b, _| {
            b.iter(|| gradient(&problem, black_box(&schedule)).unwrap())
        });
    }
    group.finish();
}

fn bench_gap_profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("gap-profile-256");
    group.sample_size(10);
    for nl in [5usize, 6] {
        let hi = logical_initial_h(nl, 1.0).unwrap();
        let hf = oracle_operator(Space::Logical(nl), 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nl), &nl, |b, _| {
            b.iter(|| gap_profile(black_box(&hi), &hf, 256).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_trotter_run, bench_gradient_pass, bench_gap_profile);
criterion_main!(benches);
