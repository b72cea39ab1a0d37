//! Trotterization invariants: the composed product is unitary, converges to
//! the continuous reference as M grows, and runs identically in the logical
//! and embedded full spaces.

use qdfs_core::aqc::{adiabatic_reference, logical_initial_h, xxx_ground_state, Schedule};
use qdfs_core::dfs::{dfs_basis, embed};
use qdfs_core::spinlab::{Propagator, QuantumState};
use qdfs_core::trotter::{
    fidelity_sweep, linear_coeffs, oracle_operator, trotter_evolve, SweepConfig, WSelector,
};
use qdfs_core::Space;

#[test]
fn composed_product_is_unitary_matrix() {
    // materialize the product at a modest dimension and test unitarity
    let nl = 4;
    let space = Space::Logical(nl);
    let hi = logical_initial_h(nl, 1.0).unwrap();
    let hf = oracle_operator(space, 5).unwrap();
    let plan = linear_coeffs(12.0, 24).unwrap().with_repetition(2).unwrap();
    let dim = space.dim();
    let mut u = nalgebra::DMatrix::from_element(dim, dim, qdfs_core::C64::new(0.0, 0.0));
    for col in 0..dim {
        let e = QuantumState::basis_state(space, col).unwrap();
        let out = trotter_evolve(&hi, &hf, &plan, &e).unwrap();
        u.set_column(col, out.amplitudes());
    }
    let gram = u.adjoint() * &u;
    let id = nalgebra::DMatrix::<qdfs_core::C64>::identity(dim, dim);
    let dev = (gram - id).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    assert!(dev < 1e-9, "unitarity deviation {dev:.3e}");
}

#[test]
fn fidelity_converges_to_continuous_reference() {
    let nl = 3;
    let w = 5;
    let t = 40.0;
    let hi = logical_initial_h(nl, 1.0).unwrap();
    let hf = oracle_operator(Space::Logical(nl), w).unwrap();
    let psi0 = xxx_ground_state(nl).unwrap();
    let schedule = Schedule::linear(t, 64).unwrap();
    let (reference, _) = adiabatic_reference(&hi, &hf, &schedule, &psi0, 1e-9).unwrap();
    let f_ref = reference.probability(w);

    let mut errors = Vec::new();
    for m in [50usize, 100, 200, 400, 800] {
        let plan = linear_coeffs(t, m).unwrap();
        let out = trotter_evolve(&hi, &hf, &plan, &psi0).unwrap();
        errors.push((out.probability(w) - f_ref).abs());
    }
    for pair in errors.windows(2) {
        assert!(
            pair[1] <= pair[0] * 1.05 + 1e-12,
            "convergence not monotone: {errors:?}"
        );
    }
    assert!(
        *errors.last().unwrap() < 1e-3,
        "saturated error too large: {errors:?}"
    );
}

#[test]
fn logical_and_full_space_runs_agree() {
    let nl = 3;
    let n = 2 * nl;
    let w = 6;
    let t = 30.0;
    let m = 90;
    let plan = linear_coeffs(t, m).unwrap();

    // logical-space run
    let hi = logical_initial_h(nl, 1.0).unwrap();
    let hf = oracle_operator(Space::Logical(nl), w).unwrap();
    let psi0 = xxx_ground_state(nl).unwrap();
    let logical_out = trotter_evolve(&hi, &hf, &plan, &psi0).unwrap();
    let f_logical = logical_out.probability(w);

    // embedded full-space run with the pair-exchange driver
    let map = dfs_basis(n).unwrap();
    let full = map.full_space();
    let prop_i = Propagator::pair_exchange(full, 1.0).unwrap();
    let w_full = map.logical_indices()[w];
    let prop_f = Propagator::new(&oracle_operator(full, w_full).unwrap()).unwrap();
    let psi0_full = embed(&psi0, full, &map).unwrap();
    let full_out =
        qdfs_core::trotter::trotter_evolve_prepared(&prop_i, &prop_f, &plan, &psi0_full).unwrap();
    let f_full = full_out.probability(w_full);

    assert!(
        (f_logical - f_full).abs() < 1e-8,
        "space mismatch: logical {f_logical} vs full {f_full}"
    );

    // leakage out of the logical subspace stays at round-off
    let kept: f64 = map
        .logical_indices()
        .iter()
        .map(|&b| full_out.probability(b))
        .sum();
    assert!(1.0 - kept < 1e-10, "leakage {:.3e}", 1.0 - kept);
}

#[test]
fn sweep_reports_negligible_leakage_in_full_space() {
    let config = SweepConfig {
        full_space: true,
        w: WSelector::Index(2),
        ..SweepConfig::new(2, vec![10.0], vec![20, 40])
    };
    let records = fidelity_sweep(&config).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        let leakage = r.leakage.expect("full-space run records leakage");
        assert!(leakage < 1e-10);
        assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
    }
}
