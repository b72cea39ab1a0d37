//! Adiabatic engine: interpolated Hamiltonians, gap profiles, switching
//! schedules, and the piecewise-constant continuous-evolution reference.
//!
//! The interpolation is H(s) = (1-s) H_i + s H_f. The initial Hamiltonian is
//! the pair-exchange chain restricted to the logical space, whose ground state
//! is a product of singlets; a diagonal sign flip maps it to the uniform
//! superposition, so the standard search analysis carries over unchanged.

use crate::error::{CoreError, Result};
use crate::space::{site_mask, Space};
use crate::spinlab::{eig_lowest, Operator, Propagator, QuantumState};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Provenance of a switching schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Linear,
    GapOptimized,
    Krotov,
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleKind::Linear => write!(f, "linear"),
            ScheduleKind::GapOptimized => write!(f, "gap-optimized"),
            ScheduleKind::Krotov => write!(f, "krotov"),
        }
    }
}

/// Discretized switching function: values s_l at the right endpoints of M
/// equal intervals covering [0, T].
#[derive(Debug, Clone)]
pub struct Schedule {
    total_time: f64,
    values: Vec<f64>,
    kind: ScheduleKind,
}

impl Schedule {
    /// Validate and wrap switching values. All values must sit in [0, 1];
    /// linear and gap-optimized schedules must end at 1, and gap-optimized
    /// values must be non-decreasing.
    pub fn new(kind: ScheduleKind, total_time: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::invalid("schedule needs at least one step"));
        }
        if total_time < 0.0 {
            return Err(CoreError::invalid("total time must be non-negative"));
        }
        if values.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
            return Err(CoreError::invalid("switching values must lie in [0, 1]"));
        }
        match kind {
            ScheduleKind::Linear | ScheduleKind::GapOptimized => {
                let last = *values.last().unwrap();
                if (last - 1.0).abs() > 1e-12 {
                    return Err(CoreError::invalid(format!(
                        "{kind} schedule must end at s = 1, got {last}"
                    )));
                }
                if kind == ScheduleKind::GapOptimized
                    && values.windows(2).any(|w| w[1] < w[0] - 1e-12)
                {
                    return Err(CoreError::invalid(
                        "gap-optimized schedule must be non-decreasing",
                    ));
                }
            }
            ScheduleKind::Krotov => {}
        }
        Ok(Schedule {
            total_time,
            values,
            kind,
        })
    }

    /// Linear switching s_l = l/M.
    pub fn linear(total_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(CoreError::invalid("schedule needs at least one step"));
        }
        let values = (1..=steps).map(|l| l as f64 / steps as f64).collect();
        Schedule::new(ScheduleKind::Linear, total_time, values)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Continuous switching function by piecewise-linear interpolation through
    /// (l dt, s_l), anchored at s(0) = 0 for linear and gap-optimized kinds
    /// (both start from the initial Hamiltonian) and at s_1 otherwise.
    pub fn value_at(&self, t: f64) -> f64 {
        let dt = self.dt();
        let start = match self.kind {
            ScheduleKind::Linear | ScheduleKind::GapOptimized => 0.0,
            ScheduleKind::Krotov => self.values[0],
        };
        if t <= 0.0 {
            return start;
        }
        if t >= self.total_time {
            return *self.values.last().unwrap();
        }
        let pos = t / dt;
        let idx = pos.floor() as usize; // interval index, 0-based
        let frac = pos - idx as f64;
        let left = if idx == 0 { start } else { self.values[idx - 1] };
        let right = self.values[idx.min(self.steps() - 1)];
        left + frac * (right - left)
    }

    /// Same values rebranded with a different provenance tag.
    pub fn with_kind(mut self, kind: ScheduleKind) -> Self {
        self.kind = kind;
        self
    }

    /// Replace the switching values (used by the optimizer).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Schedule::new(self.kind, self.total_time, values)
    }
}

/// Two lowest instantaneous energies sampled over the interpolation parameter.
#[derive(Debug, Clone)]
pub struct GapProfile {
    grid: Vec<f64>,
    e0: Vec<f64>,
    e1: Vec<f64>,
    degenerate: bool,
}

/// Gap below which a profile point counts as degenerate (the schedule
/// integral would diverge there).
pub const DEGENERACY_TOL: f64 = 1e-12;

impl GapProfile {
    /// Assemble from parallel arrays; flags degenerate points.
    pub fn new(grid: Vec<f64>, e0: Vec<f64>, e1: Vec<f64>) -> Result<Self> {
        if grid.len() != e0.len() || grid.len() != e1.len() || grid.len() < 2 {
            return Err(CoreError::invalid("profile arrays must align, length >= 2"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::invalid("profile grid must be strictly increasing"));
        }
        if (grid[0] - 0.0).abs() > 1e-15 || (grid[grid.len() - 1] - 1.0).abs() > 1e-15 {
            return Err(CoreError::invalid("profile grid must span [0, 1]"));
        }
        for (a, b) in e0.iter().zip(e1.iter()) {
            if b < a {
                return Err(CoreError::invalid("first excited energy below ground energy"));
            }
        }
        let degenerate = e0
            .iter()
            .zip(e1.iter())
            .any(|(a, b)| (b - a).abs() < DEGENERACY_TOL);
        Ok(GapProfile {
            grid,
            e0,
            e1,
            degenerate,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn ground(&self) -> &[f64] {
        &self.e0
    }

    pub fn excited(&self) -> &[f64] {
        &self.e1
    }

    pub fn gap(&self, i: usize) -> f64 {
        self.e1[i] - self.e0[i]
    }

    /// True when some grid point is degenerate within tolerance.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// (s, gap) at the smallest sampled gap.
    pub fn min_gap(&self) -> (f64, f64) {
        let (idx, _) = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| self.gap(a.0).total_cmp(&self.gap(b.0)))
            .expect("non-empty grid");
        (self.grid[idx], self.gap(idx))
    }
}

/// Interpolated Hamiltonian (1-s) H_i + s H_f.
pub fn h_interp(s: f64, h_initial: &Operator, h_final: &Operator) -> Result<Operator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(CoreError::invalid(format!(
            "interpolation parameter {s} outside [0, 1]"
        )));
    }
    h_initial.linear_combination(C64::new(1.0 - s, 0.0), h_final, C64::new(s, 0.0))
}

/// Pair-exchange initial Hamiltonian restricted to the logical space:
/// per logical qubit, -J I + 2J X_L. Per-qubit spectrum {-3J, J}.
pub fn logical_initial_h(n_logical: usize, coupling: f64) -> Result<Operator> {
    if n_logical == 0 {
        return Err(CoreError::invalid("need at least one logical qubit"));
    }
    if coupling <= 0.0 {
        return Err(CoreError::invalid("coupling J must be positive"));
    }
    let space = Space::Logical(n_logical);
    let dim = space.dim();
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    let shift = C64::new(-coupling * n_logical as f64, 0.0);
    let hop = C64::new(2.0 * coupling, 0.0);
    for b in 0..dim {
        m[(b, b)] += shift;
        for q in 0..n_logical {
            let mask = site_mask(q, n_logical);
            m[(b ^ mask, b)] += hop;
        }
    }
    Operator::from_dense(space, m, true)
}

/// Reusable fast propagator for [`logical_initial_h`].
pub fn logical_initial_propagator(n_logical: usize, coupling: f64) -> Result<Propagator> {
    Propagator::qubit_rotations(Space::Logical(n_logical), -coupling, 2.0 * coupling)
}

/// Ground state of the pair-exchange chain in the logical space: a product of
/// (|0>_L - |1>_L)/sqrt2 per qubit. Amplitudes have equal magnitude and sign
/// (-1)^(number of 1 bits).
pub fn xxx_ground_state(n_logical: usize) -> Result<QuantumState> {
    if n_logical == 0 {
        return Err(CoreError::invalid("need at least one logical qubit"));
    }
    let space = Space::Logical(n_logical);
    let dim = space.dim();
    let mag = 1.0 / (dim as f64).sqrt();
    let amps = DVector::from_fn(dim, |b, _| {
        let sign = if (b as usize).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        C64::new(sign * mag, 0.0)
    });
    QuantumState::new(space, amps)
}

/// Diagonal involution with entry (-1)^(number of 1 bits): maps the
/// pair-exchange ground state to the uniform superposition and back.
pub fn sign_flip_unitary(n_logical: usize) -> Result<Operator> {
    if n_logical == 0 {
        return Err(CoreError::invalid("need at least one logical qubit"));
    }
    let space = Space::Logical(n_logical);
    let diag: Vec<f64> = (0..space.dim())
        .map(|b| if (b as usize).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    Operator::from_real_diagonal(space, &diag)
}

/// Sample the two lowest energies of H(s) on a uniform grid over [0, 1].
pub fn gap_profile(
    h_initial: &Operator,
    h_final: &Operator,
    grid_size: usize,
) -> Result<GapProfile> {
    if grid_size < 64 {
        return Err(CoreError::invalid("gap grid needs at least 64 points"));
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .collect();
    let energies: Result<Vec<(f64, f64)>> = grid
        .par_iter()
        .map(|&s| {
            let h = h_interp(s, h_initial, h_final)?;
            let pairs = eig_lowest(&h, 2)?;
            Ok((pairs[0].0, pairs[1].0))
        })
        .collect();
    let energies = energies?;
    let (e0, e1): (Vec<f64>, Vec<f64>) = energies.into_iter().unzip();
    GapProfile::new(grid, e0, e1)
}

/// Gap-optimized switching schedule: s_l solves
/// l dt = T F(s_l)/F(1) with F(s) the integral of 1/gap^2 from 0 to s,
/// computed by cumulative trapezoid, monotone cubic interpolation, and
/// bisection. Time spent at each s is proportional to gap(s)^{-2}, so the
/// sweep lingers where the gap closes.
pub fn gap_schedule(profile: &GapProfile, total_time: f64, steps: usize) -> Result<Schedule> {
    if steps == 0 {
        return Err(CoreError::invalid("schedule needs at least one step"));
    }
    if profile.is_degenerate() {
        return Err(CoreError::invalid(
            "gap profile has degenerate points; schedule integral diverges",
        ));
    }
    let grid = profile.grid();
    let weights: Vec<f64> = (0..grid.len())
        .map(|i| {
            let g = profile.gap(i);
            1.0 / (g * g)
        })
        .collect();
    // cumulative trapezoid of the integrand
    let mut cumulative = vec![0.0f64; grid.len()];
    for i in 1..grid.len() {
        cumulative[i] = cumulative[i - 1]
            + 0.5 * (weights[i] + weights[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let total = *cumulative.last().unwrap();
    if !(total.is_finite() && total > 0.0) {
        return Err(CoreError::Numerical(
            "schedule integral is not positive and finite".into(),
        ));
    }
    let normalized: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    if normalized.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::Numerical(
            "cumulative schedule integral is not strictly increasing".into(),
        ));
    }
    let interp = MonotoneCubic::new(grid.to_vec(), normalized.clone())?;
    let mut values = Vec::with_capacity(steps);
    for l in 1..=steps {
        let target = l as f64 / steps as f64;
        let s = if l == steps {
            1.0
        } else {
            interp.invert(target)
        };
        values.push(s.clamp(0.0, 1.0));
    }
    Schedule::new(ScheduleKind::GapOptimized, total_time, values)
}

/// Forward map of the schedule construction: F(s)/F(1) evaluated by the same
/// quadrature. Exposed so tests can verify the inversion round-trip.
pub fn gap_schedule_forward(profile: &GapProfile, s: f64) -> Result<f64> {
    let grid = profile.grid();
    let weights: Vec<f64> = (0..grid.len())
        .map(|i| {
            let g = profile.gap(i);
            1.0 / (g * g)
        })
        .collect();
    let mut cumulative = vec![0.0f64; grid.len()];
    for i in 1..grid.len() {
        cumulative[i] = cumulative[i - 1]
            + 0.5 * (weights[i] + weights[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let total = *cumulative.last().unwrap();
    let normalized: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    let interp = MonotoneCubic::new(grid.to_vec(), normalized)?;
    Ok(interp.eval(s))
}

/// Piecewise-constant reference propagation along a schedule: each of the M
/// intervals is split into `substeps` slices, and within each slice the state
/// evolves exactly under H(s) frozen at the slice midpoint of the interpolated
/// switching function. Doubling `substeps` converges to the continuous
/// time-ordered evolution.
pub fn adiabatic_evolve(
    h_initial: &Operator,
    h_final: &Operator,
    schedule: &Schedule,
    substeps: usize,
    psi0: &QuantumState,
) -> Result<QuantumState> {
    if substeps == 0 {
        return Err(CoreError::invalid("need at least one substep per interval"));
    }
    if h_initial.space() != h_final.space() {
        return Err(CoreError::SpaceMismatch {
            expected: h_initial.space(),
            found: h_final.space(),
        });
    }
    if psi0.space() != h_initial.space() {
        return Err(CoreError::SpaceMismatch {
            expected: h_initial.space(),
            found: psi0.space(),
        });
    }
    let steps = schedule.steps();
    let dt = schedule.dt();
    let slice = dt / substeps as f64;
    let mut amps = psi0.amplitudes().clone();
    for l in 0..steps {
        for j in 0..substeps {
            let t_mid = (l as f64 + (j as f64 + 0.5) / substeps as f64) * dt;
            let s = schedule.value_at(t_mid);
            let h = h_interp(s, h_initial, h_final)?;
            let prop = Propagator::new(&h)?;
            prop.apply_vec(&mut amps, slice);
        }
    }
    QuantumState::new(psi0.space(), amps)
}

/// Continuous-evolution reference: runs [`adiabatic_evolve`] with doubling
/// substeps until the final state moves by less than `tolerance` in L2 norm.
/// Returns the converged state and the substep count that achieved it.
pub fn adiabatic_reference(
    h_initial: &Operator,
    h_final: &Operator,
    schedule: &Schedule,
    psi0: &QuantumState,
    tolerance: f64,
) -> Result<(QuantumState, usize)> {
    let mut substeps = 1usize;
    let mut current = adiabatic_evolve(h_initial, h_final, schedule, substeps, psi0)?;
    loop {
        let finer = adiabatic_evolve(h_initial, h_final, schedule, substeps * 2, psi0)?;
        let diff = (finer.amplitudes() - current.amplitudes()).norm();
        current = finer;
        substeps *= 2;
        if diff < tolerance {
            return Ok((current, substeps));
        }
        if substeps > 1 << 20 {
            return Err(CoreError::Numerical(
                "reference propagation failed to converge".into(),
            ));
        }
    }
}

/// Monotone cubic Hermite interpolant (Fritsch–Carlson tangents).
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(CoreError::invalid("interpolant needs aligned arrays, length >= 2"));
        }
        let n = x.len();
        let mut slopes = vec![0.0f64; n - 1];
        for i in 0..n - 1 {
            slopes[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut tangents = vec![0.0f64; n];
        tangents[0] = slopes[0];
        tangents[n - 1] = slopes[n - 2];
        for i in 1..n - 1 {
            tangents[i] = if slopes[i - 1] * slopes[i] <= 0.0 {
                0.0
            } else {
                0.5 * (slopes[i - 1] + slopes[i])
            };
        }
        // limit tangents to keep monotonicity
        for i in 0..n - 1 {
            if slopes[i] == 0.0 {
                tangents[i] = 0.0;
                tangents[i + 1] = 0.0;
            } else {
                let a = tangents[i] / slopes[i];
                let b = tangents[i + 1] / slopes[i];
                let r = a * a + b * b;
                if r > 9.0 {
                    let scale = 3.0 / r.sqrt();
                    tangents[i] = scale * a * slopes[i];
                    tangents[i + 1] = scale * b * slopes[i];
                }
            }
        }
        Ok(MonotoneCubic { x, y, tangents })
    }

    fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq <= self.x[0] {
            return self.y[0];
        }
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let idx = match self
            .x
            .binary_search_by(|probe| probe.total_cmp(&xq))
        {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[idx + 1] - self.x[idx];
        let t = (xq - self.x[idx]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[idx]
            + h10 * h * self.tangents[idx]
            + h01 * self.y[idx + 1]
            + h11 * h * self.tangents[idx + 1]
    }

    /// Solve eval(x) = target for monotone increasing data by bisection.
    fn invert(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (self.x[0], *self.x.last().unwrap());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::{dfs_basis, restrict_operator};
    use crate::grover::{uniform_state, GroverInstance};
    use crate::spinlab::xxx_pairs;
    use approx::assert_abs_diff_eq;

    fn oracle(n_logical: usize, w: usize) -> Operator {
        let inst = GroverInstance::new(Space::Logical(n_logical), w).unwrap();
        Operator::outer(inst.space(), -1.0, inst.marked_state().amplitudes()).unwrap()
    }

    #[test]
    fn interp_endpoints() {
        let hi = logical_initial_h(2, 1.0).unwrap();
        let hf = oracle(2, 1);
        assert!(h_interp(0.0, &hi, &hf).unwrap().max_diff(&hi).unwrap() < 1e-15);
        assert!(h_interp(1.0, &hi, &hf).unwrap().max_diff(&hf).unwrap() < 1e-15);
        assert!(h_interp(1.2, &hi, &hf).is_err());
        assert!(h_interp(-0.1, &hi, &hf).is_err());
    }

    #[test]
    fn interp_midpoint_single_qubit_analytic() {
        // one logical qubit, w = 0: H(1/2) = [[-1, 1], [1, -1/2]], whose
        // eigenvalues follow from the quadratic formula
        let hi = logical_initial_h(1, 1.0).unwrap();
        let hf = oracle(1, 0);
        let h = h_interp(0.5, &hi, &hf).unwrap();
        let pairs = eig_lowest(&h, 2).unwrap();
        let (tr, det): (f64, f64) = (-1.5, (-1.0) * (-0.5) - 1.0);
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert_abs_diff_eq!(pairs[0].0, (tr - disc) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].0, (tr + disc) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn initial_h_single_qubit_spectrum() {
        let h = logical_initial_h(1, 1.0).unwrap();
        let pairs = eig_lowest(&h, 2).unwrap();
        assert_abs_diff_eq!(pairs[0].0, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn initial_h_three_qubits_ground_energy() {
        let h = logical_initial_h(3, 1.0).unwrap();
        let pairs = eig_lowest(&h, 1).unwrap();
        assert_abs_diff_eq!(pairs[0].0, -9.0, epsilon = 1e-10);
    }

    #[test]
    fn initial_h_matches_restricted_pair_chain() {
        let map = dfs_basis(6).unwrap();
        let full = xxx_pairs(6, 1.0).unwrap();
        let restricted = restrict_operator(&full, map.logical_space(), &map).unwrap();
        let direct = logical_initial_h(3, 1.0).unwrap();
        assert!(restricted.max_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn ground_state_single_qubit() {
        let psi = xxx_ground_state(1).unwrap();
        let inv = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(psi.amplitudes()[0].re, inv, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[1].re, -inv, epsilon = 1e-15);
    }

    #[test]
    fn ground_state_energy_expectation() {
        for nl in 1..=4 {
            let j = 1.0;
            let psi = xxx_ground_state(nl).unwrap();
            let h = logical_initial_h(nl, j).unwrap();
            assert_abs_diff_eq!(
                psi.expectation(&h).unwrap(),
                -3.0 * j * nl as f64,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sign_flip_maps_ground_to_uniform() {
        let nl = 3;
        let u = sign_flip_unitary(nl).unwrap();
        let psi = xxx_ground_state(nl).unwrap();
        let flipped = u.apply_vec(psi.amplitudes());
        let s = uniform_state(Space::Logical(nl));
        assert!((flipped - s.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn sign_flip_diagonal_two_qubits() {
        let u = sign_flip_unitary(2).unwrap();
        assert_eq!(u.as_real_diagonal().unwrap(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn sign_flip_is_involution() {
        let u = sign_flip_unitary(3).unwrap();
        let squared = u.matmul(&u).unwrap();
        let id = Operator::identity(Space::Logical(3));
        assert!(squared.max_diff(&id).unwrap() < 1e-15);
        assert!(u.hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn gap_profile_final_point_projector_spectrum() {
        let hi = logical_initial_h(2, 1.0).unwrap();
        let hf = oracle(2, 3);
        let profile = gap_profile(&hi, &hf, 65).unwrap();
        let last = profile.grid().len() - 1;
        assert_abs_diff_eq!(profile.ground()[last], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(profile.excited()[last], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn min_gap_shrinks_with_system_size() {
        let gap_at = |nl: usize| {
            let hi = logical_initial_h(nl, 1.0).unwrap();
            let hf = oracle(nl, 1);
            gap_profile(&hi, &hf, 129).unwrap().min_gap().1
        };
        assert!(gap_at(5) < gap_at(3));
    }

    #[test]
    fn constant_gap_profile_gives_linear_schedule() {
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let e0 = vec![0.0; 101];
        let e1 = vec![2.0; 101];
        let profile = GapProfile::new(grid, e0, e1).unwrap();
        let schedule = gap_schedule(&profile, 10.0, 20).unwrap();
        for (l, &s) in schedule.values().iter().enumerate() {
            assert_abs_diff_eq!(s, (l + 1) as f64 / 20.0, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(*schedule.values().last().unwrap(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn degenerate_profile_rejected() {
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let e0 = vec![0.0; 101];
        let mut e1 = vec![1.0; 101];
        e1[50] = 0.0;
        let profile = GapProfile::new(grid, e0, e1).unwrap();
        assert!(profile.is_degenerate());
        assert!(gap_schedule(&profile, 10.0, 20).is_err());
    }

    #[test]
    fn gap_schedule_inverts_forward_map() {
        let hi = logical_initial_h(3, 1.0).unwrap();
        let hf = oracle(3, 2);
        let profile = gap_profile(&hi, &hf, 1024).unwrap();
        let steps = 40;
        let schedule = gap_schedule(&profile, 30.0, steps).unwrap();
        for (l, &s) in schedule.values().iter().enumerate() {
            let u = gap_schedule_forward(&profile, s).unwrap();
            assert_abs_diff_eq!(u, (l + 1) as f64 / steps as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_duration_evolution_is_identity() {
        let hi = logical_initial_h(2, 1.0).unwrap();
        let hf = oracle(2, 0);
        let schedule = Schedule::linear(0.0, 1).unwrap();
        let psi0 = xxx_ground_state(2).unwrap();
        let out = adiabatic_evolve(&hi, &hf, &schedule, 1, &psi0).unwrap();
        assert!(psi0.fidelity(&out).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn slow_sweep_reaches_marked_state() {
        let nl = 3;
        let w = 5;
        let hi = logical_initial_h(nl, 1.0).unwrap();
        let hf = oracle(nl, w);
        let schedule = Schedule::linear(400.0, 400).unwrap();
        let psi0 = xxx_ground_state(nl).unwrap();
        let out = adiabatic_evolve(&hi, &hf, &schedule, 2, &psi0).unwrap();
        let target = QuantumState::basis_state(Space::Logical(nl), w).unwrap();
        assert!(target.fidelity(&out).unwrap() > 0.99);
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(ScheduleKind::Linear, 1.0, vec![0.5, 0.9]).is_err());
        assert!(Schedule::new(ScheduleKind::GapOptimized, 1.0, vec![0.7, 0.3, 1.0]).is_err());
        assert!(Schedule::new(ScheduleKind::Krotov, 1.0, vec![0.7, 0.3, 0.9]).is_ok());
        assert!(Schedule::new(ScheduleKind::Linear, 1.0, vec![0.5, 1.3]).is_err());
    }

    #[test]
    fn monotone_cubic_round_trip() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * v * (3.0 - 2.0 * v)).collect();
        let interp = MonotoneCubic::new(x, y).unwrap();
        for k in 1..20 {
            let target = k as f64 / 20.0;
            let s = interp.invert(target);
            assert_abs_diff_eq!(interp.eval(s), target, epsilon = 1e-10);
        }
    }
}
