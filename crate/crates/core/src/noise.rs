//! Collective-dephasing testbench.
//!
//! The joint generator is H = H_s x I + I x H_B + Z_total x B. When the
//! system Hamiltonian commutes with total Z, the coupling term only attaches
//! bath phases per magnetization sector; a state confined to the zero sector
//! never entangles with the bath at all. The bench simulates this exactly with
//! a small spin bath, or as an ensemble average over a stochastic collective
//! field, and compares protected runs against symmetry-broken controls.

use crate::dfs::{check_symmetry, dfs_basis, embed};
use crate::error::{CoreError, Result};
use crate::grover::{grover_h, peak_time, GroverInstance};
use crate::space::{site_mask, Space};
use crate::spinlab::{expm_hermitian, Operator, Propagator, QuantumState};
use crate::trotter::{oracle_operator, schedule_coeffs, TrotterPlan};
use crate::aqc::Schedule;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Default transverse-field strength of the bath Hamiltonian.
pub const DEFAULT_BATH_FIELD: f64 = 0.3;
/// Default system-bath coupling strength.
pub const DEFAULT_BATH_COUPLING: f64 = 1.0;
/// Default stationary amplitude of the stochastic collective field.
pub const DEFAULT_NOISE_AMPLITUDE: f64 = 0.5;
/// Default correlation time of the stochastic collective field.
pub const DEFAULT_CORRELATION_TIME: f64 = 1.0;
/// Joint-dimension guard: 2^(n+m) must stay within this.
pub const MAX_JOINT_DIM: usize = 1 << 12;
/// Smallest ensemble that gives usable purity statistics.
pub const MIN_ENSEMBLE: usize = 100;

/// Environment model coupled through the total-Z operator.
#[derive(Debug, Clone)]
pub enum BathModel {
    /// m bath spins with H_B = field * sum X_b and B = coupling * sum Z_b,
    /// evolved exactly alongside the system.
    SpinBath {
        bath_spins: usize,
        coupling: f64,
        field: f64,
    },
    /// Ornstein-Uhlenbeck collective field eta(t) Z_total, ensemble-averaged.
    Stochastic {
        amplitude: f64,
        correlation_time: f64,
        ensemble: usize,
        seed: u64,
    },
}

impl BathModel {
    pub fn spin_bath(bath_spins: usize, coupling: f64) -> Self {
        BathModel::SpinBath {
            bath_spins,
            coupling,
            field: DEFAULT_BATH_FIELD,
        }
    }

    pub fn stochastic(ensemble: usize, seed: u64) -> Self {
        BathModel::Stochastic {
            amplitude: DEFAULT_NOISE_AMPLITUDE,
            correlation_time: DEFAULT_CORRELATION_TIME,
            ensemble,
            seed,
        }
    }

    fn validate(&self, system_dim: usize) -> Result<()> {
        match *self {
            BathModel::SpinBath { bath_spins, .. } => {
                if bath_spins > 4 {
                    return Err(CoreError::DimensionGuard {
                        requested: bath_spins,
                        limit: 4,
                    });
                }
                let joint = system_dim << bath_spins;
                if joint > MAX_JOINT_DIM {
                    return Err(CoreError::DimensionGuard {
                        requested: joint,
                        limit: MAX_JOINT_DIM,
                    });
                }
            }
            BathModel::Stochastic { ensemble, .. } => {
                if ensemble < MIN_ENSEMBLE {
                    return Err(CoreError::invalid(format!(
                        "stochastic ensemble must have at least {MIN_ENSEMBLE} trajectories"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A protocol as a sequence of piecewise-constant system Hamiltonians, with
/// its natural initial state and target basis index.
#[derive(Debug, Clone)]
pub struct PiecewiseProtocol {
    space: Space,
    hamiltonians: Vec<Operator>,
    /// (hamiltonian index, duration) in execution order.
    steps: Vec<(usize, f64)>,
    initial: QuantumState,
    /// Full-space basis index of the search target.
    target_index: usize,
}

impl PiecewiseProtocol {
    /// Single time-independent segment.
    pub fn single(
        h: Operator,
        duration: f64,
        initial: QuantumState,
        target_index: usize,
    ) -> Result<Self> {
        if duration < 0.0 {
            return Err(CoreError::invalid("duration must be non-negative"));
        }
        if initial.space() != h.space() {
            return Err(CoreError::SpaceMismatch {
                expected: h.space(),
                found: initial.space(),
            });
        }
        Ok(PiecewiseProtocol {
            space: h.space(),
            hamiltonians: vec![h],
            steps: vec![(0, duration)],
            initial,
            target_index,
        })
    }

    /// Continuous search embedded in the full space of n spins: the search
    /// Hamiltonian over the logical basis run from the uniform state, for
    /// `duration` (default: the exact peak time of the logical search).
    pub fn continuous_grover(n: usize, w_index: usize, duration: Option<f64>) -> Result<Self> {
        let map = dfs_basis(n)?;
        let inst = GroverInstance::new(map.logical_space(), w_index)?;
        let h_logical = grover_h(&inst);
        let full = map.full_space();
        // lift the rank-2 logical Hamiltonian into the full space
        let logical = map.logical_indices();
        let dim = full.dim();
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        let dense = h_logical.to_dense();
        for (r, &fr) in logical.iter().enumerate() {
            for (c, &fc) in logical.iter().enumerate() {
                m[(fr, fc)] = dense[(r, c)];
            }
        }
        let h_full = Operator::from_dense(full, m, true)?;
        let t = duration.unwrap_or_else(|| peak_time(inst.search_dim()));
        let initial = embed(&crate::grover::uniform_state(map.logical_space()), full, &map)?;
        PiecewiseProtocol::single(h_full, t, initial, logical[w_index])
    }

    /// Trotterized adiabatic search embedded in the full space of n spins:
    /// alternating oracle and driver segments from the splitting plan, run
    /// from the pair-exchange ground state.
    pub fn trotterized_aqc(
        n: usize,
        w_index: usize,
        coupling: f64,
        schedule: &Schedule,
        repetition: usize,
    ) -> Result<Self> {
        let map = dfs_basis(n)?;
        let full = map.full_space();
        let plan: TrotterPlan = schedule_coeffs(schedule).with_repetition(repetition)?;
        let driver = crate::spinlab::xxx_pairs(n, coupling)?;
        let w_full = map.logical_indices()[w_index];
        let oracle = oracle_operator(full, w_full)?;
        let mut steps = Vec::new();
        let k = plan.repetition() as f64;
        for &(f, g) in plan.coeffs() {
            for _ in 0..plan.repetition() {
                steps.push((1, g / (2.0 * k)));
                steps.push((0, f / k));
                steps.push((1, g / (2.0 * k)));
            }
        }
        let initial = embed(&crate::aqc::xxx_ground_state(n / 2)?, full, &map)?;
        Ok(PiecewiseProtocol {
            space: full,
            hamiltonians: vec![driver, oracle],
            steps,
            initial,
            target_index: w_full,
        })
    }

    /// The protocol's natural initial state.
    pub fn initial_state(&self) -> &QuantumState {
        &self.initial
    }

    /// The distinct segment Hamiltonians.
    pub fn hamiltonians(&self) -> &[Operator] {
        &self.hamiltonians
    }

    /// Full-space basis index of the search target.
    pub fn target_index(&self) -> usize {
        self.target_index
    }

    /// Add a constant extra term to every segment (e.g. a stray field that
    /// breaks the protecting symmetry).
    pub fn with_extra_term(mut self, extra: &Operator) -> Result<Self> {
        for h in &mut self.hamiltonians {
            *h = h.linear_combination(C64::new(1.0, 0.0), extra, C64::new(1.0, 0.0))?;
        }
        Ok(self)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|(_, d)| d).sum()
    }

    /// Whether every segment Hamiltonian preserves the magnetization sectors.
    pub fn preserves_sector(&self) -> Result<bool> {
        for h in &self.hamiltonians {
            if !check_symmetry(h)?.preserves_sector {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Closed-system (bath-free) run.
    pub fn closed_run(&self, psi0: &QuantumState) -> Result<QuantumState> {
        if psi0.space() != self.space {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: psi0.space(),
            });
        }
        let props: Vec<Propagator> = self
            .hamiltonians
            .iter()
            .map(Propagator::new)
            .collect::<Result<_>>()?;
        let mut amps = psi0.amplitudes().clone();
        for &(idx, duration) in &self.steps {
            props[idx].apply_vec(&mut amps, duration);
        }
        QuantumState::new(self.space, amps)
    }
}

/// Outcome of an open-system run: the reduced system density matrix and
/// purity tracking over the protocol.
#[derive(Debug, Clone)]
pub struct JointRun {
    space: Space,
    /// Reduced (or ensemble-averaged) system density matrix at the end.
    pub reduced_final: DMatrix<C64>,
    /// Purity tr(rho^2) sampled after every segment.
    pub purities: Vec<f64>,
}

impl JointRun {
    /// Smallest purity reached during the run.
    pub fn min_purity(&self) -> f64 {
        self.purities.iter().fold(1.0f64, |a, &p| a.min(p))
    }

    /// <psi| rho |psi> against a reference pure state.
    pub fn fidelity_with(&self, psi: &QuantumState) -> Result<f64> {
        if psi.space() != self.space {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: psi.space(),
            });
        }
        let rho_psi = &self.reduced_final * psi.amplitudes();
        Ok(psi.amplitudes().dotc(&rho_psi).re)
    }

    /// Trace of the reduced density matrix (should be 1).
    pub fn trace(&self) -> f64 {
        self.reduced_final.trace().re
    }
}

/// Evolve the system jointly with the bath through the protocol and return
/// the reduced system state. Symmetry of the protocol is checked but a broken
/// symmetry only downgrades the run, it does not abort it: the failure mode
/// is itself a test subject.
pub fn joint_evolve(
    protocol: &PiecewiseProtocol,
    bath: &BathModel,
    psi0: &QuantumState,
) -> Result<JointRun> {
    if psi0.space() != protocol.space() {
        return Err(CoreError::SpaceMismatch {
            expected: protocol.space(),
            found: psi0.space(),
        });
    }
    bath.validate(protocol.space().dim())?;
    match bath {
        BathModel::SpinBath {
            bath_spins,
            coupling,
            field,
        } => spin_bath_run(protocol, *bath_spins, *coupling, *field, psi0),
        BathModel::Stochastic {
            amplitude,
            correlation_time,
            ensemble,
            seed,
        } => stochastic_run(protocol, *amplitude, *correlation_time, *ensemble, *seed, psi0),
    }
}

fn spin_bath_run(
    protocol: &PiecewiseProtocol,
    bath_spins: usize,
    coupling: f64,
    field: f64,
    psi0: &QuantumState,
) -> Result<JointRun> {
    let n = protocol.space().spins();
    let dim_s = protocol.space().dim();
    let dim_b = 1usize << bath_spins;

    // bath operators on the bath factor
    let h_bath = bath_sum(bath_spins, field, BathAxis::X);
    let b_op = bath_sum(bath_spins, coupling, BathAxis::Z);
    // bath ground state of the transverse field: |-> per spin (or |0...0> at zero field)
    let chi0 = bath_ground(bath_spins, field);

    // magnetization of each system basis state enters the coupling
    let sector: Vec<f64> = (0..dim_s)
        .map(|b| crate::space::magnetization(b, n) as f64)
        .collect();

    // joint propagators per distinct system Hamiltonian
    let joint_props: Vec<Propagator> = protocol
        .hamiltonians
        .iter()
        .map(|h_sys| {
            let hs = h_sys.to_dense();
            let mut joint = DMatrix::from_element(dim_s * dim_b, dim_s * dim_b, C64::new(0.0, 0.0));
            for i in 0..dim_s {
                for j in 0..dim_s {
                    let v = hs[(i, j)];
                    if v.norm() == 0.0 {
                        continue;
                    }
                    for b in 0..dim_b {
                        joint[(i * dim_b + b, j * dim_b + b)] += v;
                    }
                }
            }
            for i in 0..dim_s {
                for b in 0..dim_b {
                    for b2 in 0..dim_b {
                        let mut v = h_bath[(b, b2)];
                        v += b_op[(b, b2)] * C64::new(sector[i], 0.0);
                        if v.norm() != 0.0 {
                            joint[(i * dim_b + b, i * dim_b + b2)] += v;
                        }
                    }
                }
            }
            let op = Operator::from_dense(joint_space(dim_s * dim_b), joint, true)?;
            Propagator::new(&op)
        })
        .collect::<Result<_>>()?;

    // initial product state
    let mut amps = DVector::from_element(dim_s * dim_b, C64::new(0.0, 0.0));
    for i in 0..dim_s {
        for b in 0..dim_b {
            amps[i * dim_b + b] = psi0.amplitudes()[i] * chi0[b];
        }
    }

    let mut purities = Vec::with_capacity(protocol.steps.len());
    let mut rho = DMatrix::from_element(dim_s, dim_s, C64::new(0.0, 0.0));
    for &(idx, duration) in &protocol.steps {
        joint_props[idx].apply_vec(&mut amps, duration);
        rho = reduce(&amps, dim_s, dim_b);
        purities.push(purity(&rho));
    }
    if protocol.steps.is_empty() {
        rho = reduce(&amps, dim_s, dim_b);
        purities.push(purity(&rho));
    }
    Ok(JointRun {
        space: protocol.space(),
        reduced_final: rho,
        purities,
    })
}

/// Fictitious space tag for joint system+bath vectors: only the dimension is
/// used, so any power-of-two wrapper works.
fn joint_space(dim: usize) -> Space {
    Space::Logical(dim.trailing_zeros() as usize)
}

enum BathAxis {
    X,
    Z,
}

fn bath_sum(bath_spins: usize, scale: f64, axis: BathAxis) -> DMatrix<C64> {
    let dim = 1usize << bath_spins;
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for spin in 0..bath_spins {
        let mask = site_mask(spin, bath_spins);
        for b in 0..dim {
            match axis {
                BathAxis::X => m[(b ^ mask, b)] += C64::new(scale, 0.0),
                BathAxis::Z => {
                    let sign = if b & mask == 0 { 1.0 } else { -1.0 };
                    m[(b, b)] += C64::new(scale * sign, 0.0);
                }
            }
        }
    }
    m
}

fn bath_ground(bath_spins: usize, field: f64) -> DVector<C64> {
    let dim = 1usize << bath_spins;
    if field == 0.0 {
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    // ground of +field * sum X is |-> per spin: sign (-1)^(number of down bits)
    let mag = 1.0 / (dim as f64).sqrt();
    DVector::from_fn(dim, |b, _| {
        let sign = if (b as usize).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        C64::new(sign * mag, 0.0)
    })
}

fn reduce(joint: &DVector<C64>, dim_s: usize, dim_b: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::from_element(dim_s, dim_s, C64::new(0.0, 0.0));
    for i in 0..dim_s {
        for j in 0..=i {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dim_b {
                acc += joint[i * dim_b + b] * joint[j * dim_b + b].conj();
            }
            rho[(i, j)] = acc;
            rho[(j, i)] = acc.conj();
        }
    }
    rho
}

fn purity(rho: &DMatrix<C64>) -> f64 {
    rho.iter().map(|v| v.norm_sqr()).sum()
}

fn stochastic_run(
    protocol: &PiecewiseProtocol,
    amplitude: f64,
    correlation_time: f64,
    ensemble: usize,
    seed: u64,
    psi0: &QuantumState,
) -> Result<JointRun> {
    let n = protocol.space().spins();
    let dim = protocol.space().dim();
    let zt: Vec<f64> = (0..dim)
        .map(|b| crate::space::magnetization(b, n) as f64)
        .collect();
    let symmetric = protocol.preserves_sector()?;
    let props: Vec<Propagator> = protocol
        .hamiltonians
        .iter()
        .map(Propagator::new)
        .collect::<Result<_>>()?;

    // per-trajectory pure-state outer products averaged pairwise for
    // order-independent summation; trajectories stay pure, so purity is only
    // meaningful for the ensemble average at the end
    let trajectories: Result<Vec<DMatrix<C64>>> = (0..ensemble)
        .into_par_iter()
        .map(|traj| {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(
                seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(traj as u64 + 1)),
            );
            let normal = StandardNormal;
            let mut eta: f64 =
                amplitude * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng);
            let mut amps = psi0.amplitudes().clone();
            for &(idx, duration) in &protocol.steps {
                if duration > 0.0 {
                    let sub_count =
                        ((duration / (correlation_time / 20.0)).ceil() as usize).max(1);
                    let sub_dt = duration / sub_count as f64;
                    let decay = (-sub_dt / correlation_time).exp();
                    let kick = amplitude * (1.0 - decay * decay).sqrt();
                    for _ in 0..sub_count {
                        apply_noisy_segment(
                            &props[idx],
                            &protocol.hamiltonians[idx],
                            symmetric,
                            &zt,
                            eta,
                            sub_dt,
                            &mut amps,
                        )?;
                        let xi: f64 =
                            <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng);
                        eta = eta * decay + kick * xi;
                    }
                }
            }
            Ok(outer(&amps))
        })
        .collect();
    let averaged = pairwise_average(trajectories?);
    let final_purity = purity(&averaged);
    Ok(JointRun {
        space: protocol.space(),
        reduced_final: averaged,
        purities: vec![final_purity],
    })
}

fn apply_noisy_segment(
    prop: &Propagator,
    h: &Operator,
    symmetric: bool,
    zt: &[f64],
    eta: f64,
    dt: f64,
    amps: &mut DVector<C64>,
) -> Result<()> {
    if symmetric {
        // [H, Z_total] = 0: split exactly into deterministic and noise phases
        prop.apply_vec(amps, dt);
        for (a, z) in amps.iter_mut().zip(zt.iter()) {
            *a *= C64::from_polar(1.0, -eta * z * dt);
        }
    } else {
        // no split available: diagonalize H + eta Z_total for this substep
        let mut m = h.to_dense();
        for (i, z) in zt.iter().enumerate() {
            m[(i, i)] += C64::new(eta * z, 0.0);
        }
        let u = expm_hermitian(&m, dt);
        *amps = &u * &*amps;
    }
    Ok(())
}

fn outer(v: &DVector<C64>) -> DMatrix<C64> {
    let dim = v.len();
    DMatrix::from_fn(dim, dim, |r, c| v[r] * v[c].conj())
}

/// Numerically order-independent mean: pairwise reduction in index order.
fn pairwise_average(mut items: Vec<DMatrix<C64>>) -> DMatrix<C64> {
    let count = items.len();
    assert!(count > 0);
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap() / C64::new(count as f64, 0.0)
}

/// Comparison of a protocol run with and without the bath.
#[derive(Debug, Clone)]
pub struct ProtectionReport {
    pub fidelity_with_bath: f64,
    pub fidelity_without_bath: f64,
    /// |with - without|.
    pub fidelity_difference: f64,
    /// 1 - min purity over the run.
    pub max_purity_loss: f64,
    /// Whether every protocol segment passed the symmetry check.
    pub symmetric: bool,
}

/// Run a protocol from its natural initial state with and without the bath
/// and compare the final search fidelities.
pub fn protection_report(protocol: &PiecewiseProtocol, bath: &BathModel) -> Result<ProtectionReport> {
    let psi0 = protocol.initial_state().clone();
    let target = QuantumState::basis_state(protocol.space(), protocol.target_index())?;
    let symmetric = protocol.preserves_sector()?;

    let closed = protocol.closed_run(&psi0)?;
    let fidelity_without_bath = target.fidelity(&closed)?;

    let open = joint_evolve(protocol, bath, &psi0)?;
    let fidelity_with_bath = open.fidelity_with(&target)?;

    Ok(ProtectionReport {
        fidelity_with_bath,
        fidelity_without_bath,
        fidelity_difference: (fidelity_with_bath - fidelity_without_bath).abs(),
        max_purity_loss: 1.0 - open.min_purity(),
        symmetric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinlab::{pauli, Pauli};
    use approx::assert_abs_diff_eq;

    #[test]
    fn decoupled_bath_matches_closed_evolution() {
        let protocol = PiecewiseProtocol::continuous_grover(4, 2, None).unwrap();
        let psi0 = protocol.initial_state().clone();
        let bath = BathModel::SpinBath {
            bath_spins: 1,
            coupling: 0.0,
            field: DEFAULT_BATH_FIELD,
        };
        let run = joint_evolve(&protocol, &bath, &psi0).unwrap();
        let closed = protocol.closed_run(&psi0).unwrap();
        let f = run.fidelity_with(&closed).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        assert!(run.min_purity() > 1.0 - 1e-12);
    }

    #[test]
    fn sector_state_stays_pure_under_spin_bath() {
        // any single-sector state: bath phases factor out entirely
        let protocol = PiecewiseProtocol::continuous_grover(4, 1, None).unwrap();
        let psi0 = protocol.initial_state().clone();
        let bath = BathModel::spin_bath(1, 1.0);
        let run = joint_evolve(&protocol, &bath, &psi0).unwrap();
        assert!(run.min_purity() > 1.0 - 1e-10);
        let closed = protocol.closed_run(&psi0).unwrap();
        assert!(run.fidelity_with(&closed).unwrap() > 1.0 - 1e-10);
        assert_abs_diff_eq!(run.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cross_sector_superposition_decoheres() {
        // (|uu> + |dd>)/sqrt2 spans magnetization sectors +2 and -2; the bath
        // tags each branch and purity collapses
        let n = 2;
        let space = Space::Full(n);
        let mut v = DVector::from_element(4, C64::new(0.0, 0.0));
        v[0b00] = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        v[0b11] = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let psi0 = QuantumState::new(space, v).unwrap();
        let free = Operator::from_real_diagonal(space, &[0.0; 4]).unwrap();
        let bath = BathModel::spin_bath(1, 1.0);
        let mut min_purity = 1.0f64;
        for steps in 1..=10 {
            let protocol =
                PiecewiseProtocol::single(free.clone(), 0.5 * steps as f64, psi0.clone(), 0)
                    .unwrap();
            let run = joint_evolve(&protocol, &bath, &psi0).unwrap();
            min_purity = min_purity.min(run.min_purity());
        }
        assert!(
            min_purity < 0.9,
            "cross-sector purity should drop, got {min_purity}"
        );
    }

    #[test]
    fn factorization_when_symmetric() {
        // joint propagator = dephasing propagator * system propagator when
        // [H_s, Z_total] = 0, measured in operator norm
        let n = 4;
        let m_bath = 1;
        let protocol = PiecewiseProtocol::continuous_grover(n, 0, Some(1.0)).unwrap();
        let h_sys = &protocol.hamiltonians[0];
        let dim_s = 1usize << n;
        let dim_b = 1usize << m_bath;
        let field = DEFAULT_BATH_FIELD;
        let g = 1.0;
        let h_bath = bath_sum(m_bath, field, BathAxis::X);
        let b_op = bath_sum(m_bath, g, BathAxis::Z);
        let sector: Vec<f64> = (0..dim_s)
            .map(|b| crate::space::magnetization(b, n) as f64)
            .collect();
        let joint_dim = dim_s * dim_b;
        let mut joint = DMatrix::from_element(joint_dim, joint_dim, C64::new(0.0, 0.0));
        let mut bath_part = DMatrix::from_element(joint_dim, joint_dim, C64::new(0.0, 0.0));
        let mut sys_part = DMatrix::from_element(joint_dim, joint_dim, C64::new(0.0, 0.0));
        let hs = h_sys.to_dense();
        for i in 0..dim_s {
            for j in 0..dim_s {
                for b in 0..dim_b {
                    sys_part[(i * dim_b + b, j * dim_b + b)] += hs[(i, j)];
                }
            }
            for b in 0..dim_b {
                for b2 in 0..dim_b {
                    bath_part[(i * dim_b + b, i * dim_b + b2)] +=
                        h_bath[(b, b2)] + b_op[(b, b2)] * C64::new(sector[i], 0.0);
                }
            }
        }
        joint += &bath_part;
        joint += &sys_part;
        let t = 1.0;
        let u_joint = expm_hermitian(&joint, t);
        let u_split = expm_hermitian(&bath_part, t) * expm_hermitian(&sys_part, t);
        let diff = u_joint - u_split;
        let spectral = diff.svd(false, false).singular_values[0];
        assert!(spectral < 1e-9, "factorization deviation {spectral:.3e}");
    }

    #[test]
    fn stochastic_sector_state_immune() {
        // within the zero sector the collective field acts as zero: every
        // trajectory reproduces the closed run exactly
        let protocol = PiecewiseProtocol::continuous_grover(4, 3, None).unwrap();
        let psi0 = protocol.initial_state().clone();
        let bath = BathModel::stochastic(100, 42);
        let run = joint_evolve(&protocol, &bath, &psi0).unwrap();
        let closed = protocol.closed_run(&psi0).unwrap();
        let f = run.fidelity_with(&closed).unwrap();
        assert!(f > 1.0 - 3.0 / (100.0f64).sqrt());
        assert!(f > 1.0 - 1e-10, "sector trajectories are exactly noise-free");
    }

    #[test]
    fn stochastic_needs_minimum_ensemble() {
        let protocol = PiecewiseProtocol::continuous_grover(4, 0, Some(0.5)).unwrap();
        let psi0 = protocol.initial_state().clone();
        let bath = BathModel::stochastic(10, 1);
        assert!(joint_evolve(&protocol, &bath, &psi0).is_err());
    }

    #[test]
    fn joint_dimension_guard() {
        let protocol = PiecewiseProtocol::continuous_grover(12, 0, Some(0.1)).unwrap();
        let psi0 = protocol.initial_state().clone();
        let bath = BathModel::spin_bath(2, 1.0);
        assert!(matches!(
            joint_evolve(&protocol, &bath, &psi0).unwrap_err(),
            CoreError::DimensionGuard { .. }
        ));
    }

    #[test]
    fn protection_report_protected_vs_broken() {
        let n = 4;
        let w = 2;
        let bath = BathModel::spin_bath(1, 1.0);
        let protected = PiecewiseProtocol::continuous_grover(n, w, None).unwrap();
        let report = protection_report(&protected, &bath).unwrap();
        assert!(report.symmetric);
        assert!(
            report.fidelity_difference < 1e-8,
            "protected difference {:.3e}",
            report.fidelity_difference
        );

        let stray = pauli(Pauli::X, 0, n).unwrap().scaled(0.5);
        let broken = PiecewiseProtocol::continuous_grover(n, w, None)
            .unwrap()
            .with_extra_term(&stray)
            .unwrap();
        let report = protection_report(&broken, &bath).unwrap();
        assert!(!report.symmetric);
        assert!(
            report.fidelity_difference > 1e-3,
            "broken-symmetry difference {:.3e}",
            report.fidelity_difference
        );
    }
}
