//! Iterative optimal-control refinement of the switching schedule.
//!
//! The optimizer differentiates the trotterized product that is actually run,
//! not the underlying continuous dynamics: each sweep propagates the state
//! forward while updating one switching value at a time against the costate
//! of the previous trajectory. Monotonic improvement is monitored rather than
//! assumed, and the update weight adapts when the coarse time grid breaks it.

use crate::aqc::{xxx_ground_state, Schedule, ScheduleKind};
use crate::error::{CoreError, Result};
use crate::space::{site_mask, Space};
use crate::spinlab::{Propagator, QuantumState};
use crate::trotter::oracle_operator;
use crate::C64;
use nalgebra::DVector;

/// Optimizer knobs. `step_weight` is the inverse update aggressiveness: each
/// switching value moves by gradient / step_weight per sweep.
#[derive(Debug, Clone)]
pub struct KrotovConfig {
    pub step_weight: f64,
    pub max_iters: usize,
    pub convergence_eps: f64,
    pub clamp: bool,
}

impl KrotovConfig {
    /// Defaults for an M-step, duration-T problem: step_weight 50 M / T,
    /// convergence on fidelity changes below 1e-7, at most 500 sweeps.
    pub fn for_problem(steps: usize, total_time: f64) -> Self {
        KrotovConfig {
            step_weight: 50.0 * steps as f64 / total_time,
            max_iters: 500,
            convergence_eps: 1e-7,
            clamp: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.step_weight <= 0.0 || self.convergence_eps <= 0.0 {
            return Err(CoreError::invalid(
                "step_weight and convergence_eps must be positive",
            ));
        }
        Ok(())
    }
}

/// The monitor tolerates objective decreases up to this multiple of the
/// convergence threshold per sweep.
pub const MONITOR_SLACK: f64 = 10.0;
/// Retries allowed when the monitor trips, each one doubling `step_weight`.
pub const MAX_WEIGHT_ADJUSTMENTS: usize = 6;

/// Search problem held fixed during an optimization: driver and oracle on the
/// logical space, trotterized with repetition K.
#[derive(Debug, Clone, Copy)]
pub struct ControlProblem {
    pub n_logical: usize,
    pub coupling: f64,
    pub repetition: usize,
    pub w_index: usize,
}

impl ControlProblem {
    pub fn new(n_logical: usize, w_index: usize) -> Result<Self> {
        if n_logical == 0 || n_logical > 8 {
            return Err(CoreError::DimensionGuard {
                requested: n_logical,
                limit: 8,
            });
        }
        if w_index >= 1usize << n_logical {
            return Err(CoreError::IndexOutOfRange {
                what: "marked state",
                index: w_index,
                bound: 1usize << n_logical,
            });
        }
        Ok(ControlProblem {
            n_logical,
            coupling: 1.0,
            repetition: 1,
            w_index,
        })
    }

    pub fn space(&self) -> Space {
        Space::Logical(self.n_logical)
    }
}

/// Record of one optimization: per-sweep objective values, the final schedule,
/// and the fidelity profile of the final trajectory.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub objectives: Vec<f64>,
    pub schedule: Schedule,
    /// (tau, fidelity with the marked state) after each step of the final run.
    pub fidelity_curve: Vec<(f64, f64)>,
    /// Step weight in effect for the accepted run.
    pub step_weight_used: f64,
    /// How many times the monitor tripped and the weight doubled.
    pub weight_adjustments: usize,
}

impl OptimizationTrace {
    pub fn final_fidelity(&self) -> f64 {
        *self.objectives.last().expect("trace never empty")
    }
}

/// Fidelity |<w| U(schedule) |psi_0>|^2 of the trotterized run.
pub fn objective(problem: &ControlProblem, schedule: &Schedule) -> Result<f64> {
    let engine = Engine::new(problem, schedule)?;
    let mut amps = engine.initial.clone();
    for &s in schedule.values() {
        engine.step(&mut amps, s);
    }
    Ok(amps[problem.w_index].norm_sqr())
}

/// Exact gradient of the objective with respect to every switching value,
/// computed by one forward and one backward pass through the splitting
/// product (both f_l and g_l dependencies included).
pub fn gradient(problem: &ControlProblem, schedule: &Schedule) -> Result<Vec<f64>> {
    let engine = Engine::new(problem, schedule)?;
    let values = schedule.values();
    let m = values.len();

    // forward pass, keeping the state before every step
    let mut states: Vec<DVector<C64>> = Vec::with_capacity(m + 1);
    states.push(engine.initial.clone());
    for &s in values {
        let mut next = states.last().unwrap().clone();
        engine.step(&mut next, s);
        states.push(next);
    }
    let overlap = states[m][problem.w_index].conj(); // <w|psi_M>

    // backward pass
    let mut grad = vec![0.0f64; m];
    let mut costate = engine.marked.clone();
    for l in (0..m).rev() {
        let bracket = engine.step_derivative_bracket(&costate, &states[l], values[l]);
        grad[l] = 2.0 * (overlap * bracket).re;
        engine.step_adjoint(&mut costate, values[l]);
    }
    Ok(grad)
}

/// Relative error between the adjoint gradient component l and a second-order
/// finite difference of the objective. One-sided differences are used when
/// s_l +- h would leave [0, 1].
pub fn gradient_check(
    problem: &ControlProblem,
    schedule: &Schedule,
    l: usize,
    h: f64,
) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(CoreError::invalid("finite-difference step outside [1e-7, 1e-3]"));
    }
    let values = schedule.values();
    if l >= values.len() {
        return Err(CoreError::IndexOutOfRange {
            what: "schedule step",
            index: l,
            bound: values.len(),
        });
    }
    let adjoint = gradient(problem, schedule)?[l];
    // evaluate through the engine directly: probe points may sit outside [0, 1]
    let engine = Engine::new(problem, schedule)?;
    let eval = |s_l: f64| -> Result<f64> {
        let mut v = values.to_vec();
        v[l] = s_l;
        let mut amps = engine.initial.clone();
        for &s in &v {
            engine.step(&mut amps, s);
        }
        Ok(amps[problem.w_index].norm_sqr())
    };
    let s = values[l];
    let fd = if s + h > 1.0 {
        // backward one-sided, second order
        (3.0 * eval(s)? - 4.0 * eval(s - h)? + eval(s - 2.0 * h)?) / (2.0 * h)
    } else if s - h < 0.0 {
        (-3.0 * eval(s)? + 4.0 * eval(s + h)? - eval(s + 2.0 * h)?) / (2.0 * h)
    } else {
        (eval(s + h)? - eval(s - h)?) / (2.0 * h)
    };
    let denom = adjoint.abs().max(fd.abs());
    if denom < 1e-12 {
        return Ok((adjoint - fd).abs());
    }
    Ok((adjoint - fd).abs() / denom)
}

/// Optimize the switching schedule from a seed. Sweeps update each value in
/// time order against the previous trajectory's costate; the objective is
/// monitored for monotonicity, and on a monitored decrease the update weight
/// doubles and the run restarts from the best schedule, up to
/// [`MAX_WEIGHT_ADJUSTMENTS`] times.
pub fn krotov_optimize(
    problem: &ControlProblem,
    seed: &Schedule,
    config: &KrotovConfig,
) -> Result<OptimizationTrace> {
    config.validate()?;
    let mut step_weight = config.step_weight;
    let mut best_values = seed.values().to_vec();
    let mut adjustments = 0usize;
    loop {
        match run_sweeps(problem, seed, &best_values, step_weight, config) {
            SweepOutcome::Converged(trace) => {
                return Ok(OptimizationTrace {
                    step_weight_used: step_weight,
                    weight_adjustments: adjustments,
                    ..trace
                })
            }
            SweepOutcome::MonitorTripped {
                best_so_far,
                decrease,
            } => {
                adjustments += 1;
                if adjustments > MAX_WEIGHT_ADJUSTMENTS {
                    return Err(CoreError::Numerical(format!(
                        "objective decreased by {decrease:.3e} even after {MAX_WEIGHT_ADJUSTMENTS} update-weight doublings; the time grid is too coarse for this step weight"
                    )));
                }
                best_values = best_so_far;
                step_weight *= 2.0;
            }
        }
    }
}

enum SweepOutcome {
    Converged(OptimizationTrace),
    MonitorTripped {
        best_so_far: Vec<f64>,
        decrease: f64,
    },
}

fn run_sweeps(
    problem: &ControlProblem,
    seed: &Schedule,
    start_values: &[f64],
    step_weight: f64,
    config: &KrotovConfig,
) -> SweepOutcome {
    let engine = Engine::new(problem, seed).expect("validated by caller");
    let m = start_values.len();
    let mut values = start_values.to_vec();
    let mut objectives = Vec::with_capacity(config.max_iters + 1);

    // objective of the incoming schedule
    let mut amps = engine.initial.clone();
    for &s in &values {
        engine.step(&mut amps, s);
    }
    let mut current = amps[problem.w_index].norm_sqr();
    objectives.push(current);

    for _iter in 0..config.max_iters {
        let values_before_sweep = values.clone();
        // forward states and costates of the current trajectory
        let mut states: Vec<DVector<C64>> = Vec::with_capacity(m + 1);
        states.push(engine.initial.clone());
        for &s in &values {
            let mut next = states.last().unwrap().clone();
            engine.step(&mut next, s);
            states.push(next);
        }
        let overlap = states[m][problem.w_index].conj();
        let mut costates: Vec<DVector<C64>> = vec![DVector::zeros(0); m + 1];
        costates[m] = engine.marked.clone();
        for l in (0..m).rev() {
            let mut c = costates[l + 1].clone();
            engine.step_adjoint(&mut c, values[l]);
            costates[l] = c;
        }

        // sequential update: propagate with already-updated values
        let mut psi = engine.initial.clone();
        for l in 0..m {
            let bracket = engine.step_derivative_bracket(&costates[l + 1], &psi, values[l]);
            let derivative = 2.0 * (overlap * bracket).re;
            let mut updated = values[l] + derivative / step_weight;
            if config.clamp {
                updated = updated.clamp(0.0, 1.0);
            }
            values[l] = updated;
            engine.step(&mut psi, updated);
        }
        let objective_new = psi[problem.w_index].norm_sqr();

        if objective_new < current - MONITOR_SLACK * config.convergence_eps {
            // restart from the last schedule whose objective was trusted
            return SweepOutcome::MonitorTripped {
                best_so_far: values_before_sweep,
                decrease: current - objective_new,
            };
        }
        let gain = objective_new - current;
        objectives.push(objective_new);
        current = objective_new;
        if gain.abs() < config.convergence_eps {
            break;
        }
    }

    // final trajectory and fidelity curve
    let schedule = Schedule::new(ScheduleKind::Krotov, seed.total_time(), values)
        .expect("clamped values stay in range");
    let mut curve = Vec::with_capacity(m + 1);
    let mut psi = engine.initial.clone();
    curve.push((0.0, psi[problem.w_index].norm_sqr()));
    for (l, &s) in schedule.values().iter().enumerate() {
        engine.step(&mut psi, s);
        curve.push(((l + 1) as f64 / m as f64, psi[problem.w_index].norm_sqr()));
    }
    SweepOutcome::Converged(OptimizationTrace {
        objectives,
        schedule,
        fidelity_curve: curve,
        step_weight_used: step_weight,
        weight_adjustments: 0,
    })
}

/// Fast application of the splitting step and its derivative for the search
/// problem: driver = sum_l (-J I + 2J X_l), oracle = -|w><w|.
struct Engine {
    n_logical: usize,
    coupling: f64,
    repetition: usize,
    w_index: usize,
    dt: f64,
    prop_driver: Propagator,
    prop_oracle: Propagator,
    initial: DVector<C64>,
    marked: DVector<C64>,
}

impl Engine {
    fn new(problem: &ControlProblem, schedule: &Schedule) -> Result<Self> {
        if problem.repetition == 0 {
            return Err(CoreError::invalid("repetition count K must be at least 1"));
        }
        let space = problem.space();
        let prop_driver =
            Propagator::qubit_rotations(space, -problem.coupling, 2.0 * problem.coupling)?;
        let prop_oracle = Propagator::new(&oracle_operator(space, problem.w_index)?)?;
        let initial = xxx_ground_state(problem.n_logical)?.into_amplitudes();
        let marked = QuantumState::basis_state(space, problem.w_index)?.into_amplitudes();
        Ok(Engine {
            n_logical: problem.n_logical,
            coupling: problem.coupling,
            repetition: problem.repetition,
            w_index: problem.w_index,
            dt: schedule.dt(),
            prop_driver,
            prop_oracle,
            initial,
            marked,
        })
    }

    /// One full splitting step U_l(s) = (B(s))^K.
    fn step(&self, amps: &mut DVector<C64>, s: f64) {
        let k = self.repetition as f64;
        let g = s * self.dt;
        let f = (1.0 - s) * self.dt;
        for _ in 0..self.repetition {
            self.prop_oracle.apply_vec(amps, g / (2.0 * k));
            self.prop_driver.apply_vec(amps, f / k);
            self.prop_oracle.apply_vec(amps, g / (2.0 * k));
        }
    }

    /// Adjoint step U_l(s)^dagger.
    fn step_adjoint(&self, amps: &mut DVector<C64>, s: f64) {
        let k = self.repetition as f64;
        let g = s * self.dt;
        let f = (1.0 - s) * self.dt;
        for _ in 0..self.repetition {
            self.prop_oracle.apply_vec(amps, -g / (2.0 * k));
            self.prop_driver.apply_vec(amps, -f / k);
            self.prop_oracle.apply_vec(amps, -g / (2.0 * k));
        }
    }

    /// Driver Hamiltonian action: y = sum_l (-J I + 2J X_l) x.
    fn apply_driver_h(&self, x: &DVector<C64>) -> DVector<C64> {
        let nl = self.n_logical;
        let j = self.coupling;
        let mut y = x * C64::new(-j * nl as f64, 0.0);
        let hop = C64::new(2.0 * j, 0.0);
        for q in 0..nl {
            let mask = site_mask(q, nl);
            for b in 0..x.len() {
                y[b] += hop * x[b ^ mask];
            }
        }
        y
    }

    /// Oracle Hamiltonian action: y = -|w><w| x.
    fn apply_oracle_h(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::from_element(x.len(), C64::new(0.0, 0.0));
        y[self.w_index] = -x[self.w_index];
        y
    }

    /// <phi| dU_l/ds |psi> with U_l = B^K and
    /// dB/ds = -i dt/2K H_f B + i dt/K E_f(g/2K) H_i E_i(f/K) E_f(g/2K) - i dt/2K B H_f.
    fn step_derivative_bracket(
        &self,
        phi: &DVector<C64>,
        psi: &DVector<C64>,
        s: f64,
    ) -> C64 {
        let kk = self.repetition;
        let k = kk as f64;
        let g_half = s * self.dt / (2.0 * k);
        let f_inner = (1.0 - s) * self.dt / k;
        let i_dt_k = C64::new(0.0, self.dt / k);
        let i_dt_2k = C64::new(0.0, self.dt / (2.0 * k));

        // chains u_m = B^m psi and v_m = (B^dagger)^m phi, m = 0..K
        let mut u_chain = Vec::with_capacity(kk + 1);
        u_chain.push(psi.clone());
        for _ in 0..kk {
            let mut next = u_chain.last().unwrap().clone();
            self.inner_step(&mut next, g_half, f_inner);
            u_chain.push(next);
        }
        let mut v_chain = Vec::with_capacity(kk + 1);
        v_chain.push(phi.clone());
        for _ in 0..kk {
            let mut next = v_chain.last().unwrap().clone();
            self.inner_step_adjoint(&mut next, g_half, f_inner);
            v_chain.push(next);
        }

        let mut total = C64::new(0.0, 0.0);
        for jj in 0..kk {
            let x = &u_chain[kk - 1 - jj]; // B^{K-1-j} psi
            let y = &v_chain[jj]; // (B^dagger)^j phi
            let bx = &u_chain[kk - jj]; // B^{K-j} psi = B x

            // term 1: -i dt/2K <y| H_f |B x>
            let t1 = -i_dt_2k * y.dotc(&self.apply_oracle_h(bx));
            // term 2: +i dt/K <E_f(g/2K)^dagger y| H_i |E_i(f/K) E_f(g/2K) x>
            let mut right = x.clone();
            self.prop_oracle.apply_vec(&mut right, g_half);
            self.prop_driver.apply_vec(&mut right, f_inner);
            let mut left = y.clone();
            self.prop_oracle.apply_vec(&mut left, -g_half);
            let t2 = i_dt_k * left.dotc(&self.apply_driver_h(&right));
            // term 3: -i dt/2K <B^dagger y| H_f |x>
            let t3 = -i_dt_2k * v_chain[jj + 1].dotc(&self.apply_oracle_h(x));

            total += t1 + t2 + t3;
        }
        total
    }

    fn inner_step(&self, amps: &mut DVector<C64>, g_half: f64, f_inner: f64) {
        self.prop_oracle.apply_vec(amps, g_half);
        self.prop_driver.apply_vec(amps, f_inner);
        self.prop_oracle.apply_vec(amps, g_half);
    }

    fn inner_step_adjoint(&self, amps: &mut DVector<C64>, g_half: f64, f_inner: f64) {
        self.prop_oracle.apply_vec(amps, -g_half);
        self.prop_driver.apply_vec(amps, -f_inner);
        self.prop_oracle.apply_vec(amps, -g_half);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aqc::{gap_profile, gap_schedule, logical_initial_h};
    use crate::trotter::oracle_operator;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn gap_seed(problem: &ControlProblem, total_time: f64, steps: usize) -> Schedule {
        let hi = logical_initial_h(problem.n_logical, problem.coupling).unwrap();
        let hf = oracle_operator(problem.space(), problem.w_index).unwrap();
        let profile = gap_profile(&hi, &hf, 512).unwrap();
        gap_schedule(&profile, total_time, steps).unwrap()
    }

    #[test]
    fn objective_in_unit_interval() {
        let problem = ControlProblem::new(2, 1).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..5 {
            let values: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..1.0)).collect();
            let schedule = Schedule::new(ScheduleKind::Krotov, 10.0, values).unwrap();
            let f = objective(&problem, &schedule).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }

    #[test]
    fn pure_oracle_schedule_keeps_initial_overlap() {
        // s = 1 throughout: the oracle only re-phases |w>, so the fidelity
        // stays at the initial overlap 1/N
        let problem = ControlProblem::new(3, 2).unwrap();
        let schedule = Schedule::new(ScheduleKind::Krotov, 12.0, vec![1.0; 24]).unwrap();
        let f = objective(&problem, &schedule).unwrap();
        assert_abs_diff_eq!(f, 1.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn adjoint_gradient_matches_finite_differences() {
        let problem = ControlProblem::new(2, 1).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let values: Vec<f64> = (0..15).map(|_| rng.random_range(0.05..0.95)).collect();
        let schedule = Schedule::new(ScheduleKind::Krotov, 7.5, values).unwrap();
        for l in [0usize, 3, 7, 11, 14] {
            let err = gradient_check(&problem, &schedule, l, 1e-5).unwrap();
            assert!(err < 1e-4, "gradient mismatch at step {l}: {err:.3e}");
        }
    }

    #[test]
    fn adjoint_gradient_matches_finite_differences_k2() {
        let problem = ControlProblem {
            repetition: 2,
            ..ControlProblem::new(2, 3).unwrap()
        };
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..10).map(|_| rng.random_range(0.05..0.95)).collect();
        let schedule = Schedule::new(ScheduleKind::Krotov, 6.0, values).unwrap();
        for l in [0usize, 4, 9] {
            let err = gradient_check(&problem, &schedule, l, 1e-5).unwrap();
            assert!(err < 1e-4, "K=2 gradient mismatch at step {l}: {err:.3e}");
        }
    }

    #[test]
    fn boundary_gradient_uses_one_sided_difference() {
        let problem = ControlProblem::new(2, 0).unwrap();
        let mut values = vec![0.4; 12];
        values[5] = 1.0;
        values[8] = 0.0;
        let schedule = Schedule::new(ScheduleKind::Krotov, 6.0, values).unwrap();
        for l in [5usize, 8] {
            let err = gradient_check(&problem, &schedule, l, 1e-5).unwrap();
            assert!(err < 1e-4, "boundary gradient mismatch at {l}: {err:.3e}");
        }
    }

    #[test]
    fn finite_difference_richardson_consistency() {
        // halving h changes the central difference consistently with O(h^2)
        let problem = ControlProblem::new(2, 1).unwrap();
        let values = vec![0.3, 0.5, 0.7, 0.6, 0.4, 0.55, 0.55, 0.5];
        let schedule = Schedule::new(ScheduleKind::Krotov, 4.0, values.clone()).unwrap();
        let eval = |s_l: f64| {
            let mut v = values.clone();
            v[2] = s_l;
            objective(
                &problem,
                &Schedule::new(ScheduleKind::Krotov, 4.0, v).unwrap(),
            )
            .unwrap()
        };
        let s = values[2];
        let fd = |h: f64| (eval(s + h) - eval(s - h)) / (2.0 * h);
        let exact = gradient(&problem, &schedule).unwrap()[2];
        let e1 = (fd(2e-4) - exact).abs();
        let e2 = (fd(1e-4) - exact).abs();
        // fourth-derivative term shrinks ~4x; allow slack for round-off
        assert!(e2 < e1 / 2.0 + 1e-12, "e1={e1:.3e} e2={e2:.3e}");
    }

    #[test]
    fn optimizer_improves_seed_small_problem() {
        let problem = ControlProblem::new(2, 2).unwrap();
        let total_time = 8.0;
        let steps = 16;
        let seed = gap_seed(&problem, total_time, steps);
        let seed_fidelity = objective(&problem, &seed).unwrap();
        let config = KrotovConfig::for_problem(steps, total_time);
        let trace = krotov_optimize(&problem, &seed, &config).unwrap();
        assert!(trace.final_fidelity() > seed_fidelity);
        // monitored monotonicity
        for pair in trace.objectives.windows(2) {
            assert!(pair[1] >= pair[0] - MONITOR_SLACK * config.convergence_eps);
        }
        // clamp respected exactly
        for &s in trace.schedule.values() {
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn converged_optimum_stops_immediately() {
        // optimize a tiny problem to convergence, then re-seed with the result:
        // the first sweep must change the objective by less than epsilon
        let problem = ControlProblem::new(1, 0).unwrap();
        let total_time = 4.0;
        let steps = 8;
        let seed = gap_seed(&problem, total_time, steps);
        let config = KrotovConfig::for_problem(steps, total_time);
        let first = krotov_optimize(&problem, &seed, &config).unwrap();
        let second = krotov_optimize(&problem, &first.schedule, &config).unwrap();
        assert!(second.objectives.len() <= 3);
        let start = second.objectives[0];
        let after_one = second.objectives.get(1).copied().unwrap_or(start);
        assert!((after_one - start).abs() < 10.0 * config.convergence_eps);
    }
}
