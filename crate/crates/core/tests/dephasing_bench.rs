//! Open-system invariants: the reduced dynamics restricted to one
//! magnetization sector is the identity channel, density matrices stay
//! physical, and the trotterized protocol is protected end to end.

use nalgebra::DVector;
use qdfs_core::aqc::{gap_profile, gap_schedule, logical_initial_h};
use qdfs_core::dfs::dfs_basis;
use qdfs_core::noise::{joint_evolve, protection_report, BathModel, PiecewiseProtocol};
use qdfs_core::spinlab::{Operator, QuantumState};
use qdfs_core::trotter::oracle_operator;
use qdfs_core::{Space, C64};

#[test]
fn sector_reduced_map_is_identity_channel() {
    // free system (H_s = 0) under the spin bath: within the zero sector the
    // coupling vanishes, so the reduced map must be the identity
    let n = 4;
    let map = dfs_basis(n).unwrap();
    let space = Space::Full(n);
    let free = Operator::from_real_diagonal(space, &vec![0.0; space.dim()]).unwrap();
    let bath = BathModel::spin_bath(2, 1.0);
    let sector = map.dfs_indices();
    // a spread of sector states, including superpositions
    let mut states: Vec<QuantumState> = sector
        .iter()
        .map(|&b| QuantumState::basis_state(space, b).unwrap())
        .collect();
    let mut v = DVector::from_element(space.dim(), C64::new(0.0, 0.0));
    for (k, &b) in sector.iter().enumerate() {
        v[b] = C64::from_polar(1.0, 1.3 * k as f64);
    }
    states.push(QuantumState::normalized(space, v).unwrap());

    for psi in &states {
        let protocol =
            PiecewiseProtocol::single(free.clone(), 2.5, psi.clone(), sector[0]).unwrap();
        let run = joint_evolve(&protocol, &bath, psi).unwrap();
        // identity channel: rho = |psi><psi| up to 1e-10
        let f = run.fidelity_with(psi).unwrap();
        assert!(f > 1.0 - 1e-10, "sector state disturbed: fidelity {f}");
        assert!(run.min_purity() > 1.0 - 1e-10);
    }
}

#[test]
fn reduced_density_matrices_stay_physical() {
    // trace one, eigenvalues non-negative within round-off, for a state that
    // genuinely decoheres
    let n = 2;
    let space = Space::Full(n);
    let mut v = DVector::from_element(4, C64::new(0.0, 0.0));
    v[0b00] = C64::new(0.6, 0.0);
    v[0b01] = C64::new(0.0, 0.4);
    v[0b11] = C64::new(-0.69282, 0.0);
    let psi = QuantumState::normalized(space, v).unwrap();
    let h = qdfs_core::spinlab::xxx_pairs(2, 1.0).unwrap();
    let protocol = PiecewiseProtocol::single(h, 3.0, psi.clone(), 0).unwrap();
    let bath = BathModel::spin_bath(2, 0.7);
    let run = joint_evolve(&protocol, &bath, &psi).unwrap();
    assert!((run.trace() - 1.0).abs() < 1e-12);
    let eig = run.reduced_final.clone().symmetric_eigen();
    for lambda in eig.eigenvalues.iter() {
        assert!(*lambda >= -1e-12, "negative population {lambda:.3e}");
    }
    // this initial state has cross-sector coherence, so purity must drop
    assert!(run.min_purity() < 1.0 - 1e-3);
}

#[test]
fn trotterized_protocol_is_protected() {
    let n = 6;
    let nl = 3;
    let w = 4;
    let t = 30.0;
    let m = 30;
    let hi = logical_initial_h(nl, 1.0).unwrap();
    let hf = oracle_operator(Space::Logical(nl), w).unwrap();
    let profile = gap_profile(&hi, &hf, 256).unwrap();
    let schedule = gap_schedule(&profile, t, m).unwrap();
    let protocol = PiecewiseProtocol::trotterized_aqc(n, w, 1.0, &schedule, 1).unwrap();
    let bath = BathModel::spin_bath(1, 1.0);
    let report = protection_report(&protocol, &bath).unwrap();
    assert!(report.symmetric);
    assert!(
        report.fidelity_difference < 1e-8,
        "trotterized protection broken: {:.3e}",
        report.fidelity_difference
    );
    assert!(report.max_purity_loss < 1e-10);
    // the search itself works
    assert!(report.fidelity_without_bath > 0.9);
}

#[test]
fn stochastic_cross_sector_state_decoheres() {
    // negative control for the stochastic model: a superposition across
    // sectors picks up random relative phases and the averaged state mixes
    let n = 2;
    let space = Space::Full(n);
    let mut v = DVector::from_element(4, C64::new(0.0, 0.0));
    v[0b00] = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    v[0b11] = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let psi = QuantumState::new(space, v).unwrap();
    let free = Operator::from_real_diagonal(space, &[0.0; 4]).unwrap();
    let protocol = PiecewiseProtocol::single(free, 8.0, psi.clone(), 0).unwrap();
    let bath = BathModel::stochastic(400, 7);
    let run = joint_evolve(&protocol, &bath, &psi).unwrap();
    assert!(
        run.min_purity() < 0.75,
        "stochastic dephasing too weak: purity {}",
        run.min_purity()
    );
    assert!((run.trace() - 1.0).abs() < 1e-12);
}
