//! Symmetric-splitting realization of the adiabatic sweep.
//!
//! The time-ordered evolution is approximated by M steps of
//! (e^{-i H_f g_l/2K} e^{-i H_i f_l/K} e^{-i H_f g_l/2K})^K applied in order
//! l = 1..M, with per-step durations f_l = (1-s_l) dt and g_l = s_l dt. The
//! inner repetition count K trades gate count for splitting error.

use crate::aqc::{
    gap_profile, gap_schedule, logical_initial_h, logical_initial_propagator, xxx_ground_state,
    Schedule, ScheduleKind,
};
use crate::dfs::{dfs_basis, embed};
use crate::error::{CoreError, Result};
use crate::space::Space;
use crate::spinlab::{spectral_norm_estimate, Operator, Propagator, QuantumState};
use crate::C64;
use nalgebra::DVector;
use rayon::prelude::*;
use std::time::Instant;

/// One splitting plan: per-step durations for the driver and oracle factors.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    total_time: f64,
    repetition: usize,
    coeffs: Vec<(f64, f64)>,
}

impl TrotterPlan {
    pub fn steps(&self) -> usize {
        self.coeffs.len()
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps() as f64
    }

    /// Inner repetition count K.
    pub fn repetition(&self) -> usize {
        self.repetition
    }

    /// Per-step (f_l, g_l) durations, l ascending.
    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    /// Change the inner repetition count.
    pub fn with_repetition(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::invalid("repetition count K must be at least 1"));
        }
        self.repetition = k;
        Ok(self)
    }

    /// Sum of all per-step durations; telescopes to T for switching-derived plans.
    pub fn coefficient_sum(&self) -> f64 {
        self.coeffs.iter().map(|(f, g)| f + g).sum()
    }
}

/// Coefficients of the linear switching: f_l = (1 - dt l / T) dt, g_l = dt^2 l / T.
pub fn linear_coeffs(total_time: f64, steps: usize) -> Result<TrotterPlan> {
    if steps == 0 {
        return Err(CoreError::invalid("plan needs at least one step"));
    }
    if total_time < 0.0 {
        return Err(CoreError::invalid("total time must be non-negative"));
    }
    let dt = total_time / steps as f64;
    let coeffs = (1..=steps)
        .map(|l| {
            let frac = l as f64 / steps as f64; // dt * l / T
            ((1.0 - frac) * dt, frac * dt)
        })
        .collect();
    Ok(TrotterPlan {
        total_time,
        repetition: 1,
        coeffs,
    })
}

/// Coefficients driven by an arbitrary schedule: f_l = (1 - s_l) dt, g_l = s_l dt.
pub fn schedule_coeffs(schedule: &Schedule) -> TrotterPlan {
    let dt = schedule.dt();
    let coeffs = schedule
        .values()
        .iter()
        .map(|&s| ((1.0 - s) * dt, s * dt))
        .collect();
    TrotterPlan {
        total_time: schedule.total_time(),
        repetition: 1,
        coeffs,
    }
}

/// dt * ||H_i - H_f||_2 estimate: the splitting is trustworthy when this is
/// well below 1. Advisory only; callers decide whether to warn.
pub fn splitting_validity(
    h_initial: &Operator,
    h_final: &Operator,
    plan: &TrotterPlan,
) -> Result<f64> {
    let diff = h_initial.linear_combination(C64::new(1.0, 0.0), h_final, C64::new(-1.0, 0.0))?;
    Ok(plan.dt() * spectral_norm_estimate(&diff))
}

/// Run the trotterized evolution with propagators built from the operators.
pub fn trotter_evolve(
    h_initial: &Operator,
    h_final: &Operator,
    plan: &TrotterPlan,
    psi0: &QuantumState,
) -> Result<QuantumState> {
    if h_initial.space() != h_final.space() {
        return Err(CoreError::SpaceMismatch {
            expected: h_initial.space(),
            found: h_final.space(),
        });
    }
    let prop_i = Propagator::new(h_initial)?;
    let prop_f = Propagator::new(h_final)?;
    trotter_evolve_prepared(&prop_i, &prop_f, plan, psi0)
}

/// Run the trotterized evolution with prebuilt propagators (the fast path for
/// sweeps and optimization loops).
pub fn trotter_evolve_prepared(
    prop_initial: &Propagator,
    prop_final: &Propagator,
    plan: &TrotterPlan,
    psi0: &QuantumState,
) -> Result<QuantumState> {
    if prop_initial.space() != prop_final.space() {
        return Err(CoreError::SpaceMismatch {
            expected: prop_initial.space(),
            found: prop_final.space(),
        });
    }
    if psi0.space() != prop_initial.space() {
        return Err(CoreError::SpaceMismatch {
            expected: prop_initial.space(),
            found: psi0.space(),
        });
    }
    let mut amps = psi0.amplitudes().clone();
    apply_plan(prop_initial, prop_final, plan, &mut amps, None);
    QuantumState::new(psi0.space(), amps)
}

/// Core splitting loop. When `observe` is given it is called after every step
/// with (step index, current amplitudes).
pub(crate) fn apply_plan(
    prop_initial: &Propagator,
    prop_final: &Propagator,
    plan: &TrotterPlan,
    amps: &mut DVector<C64>,
    mut observe: Option<&mut dyn FnMut(usize, &DVector<C64>)>,
) {
    let k = plan.repetition as f64;
    for (l, &(f, g)) in plan.coeffs.iter().enumerate() {
        for _ in 0..plan.repetition {
            prop_final.apply_vec(amps, g / (2.0 * k));
            prop_initial.apply_vec(amps, f / k);
            prop_final.apply_vec(amps, g / (2.0 * k));
        }
        if let Some(ref mut obs) = observe {
            obs(l, amps);
        }
    }
}

/// Rule assigning the inner repetition count K across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    Const(usize),
    EqualLogicalQubits,
}

impl KRule {
    pub fn value(&self, n_logical: usize) -> usize {
        match *self {
            KRule::Const(k) => k,
            KRule::EqualLogicalQubits => n_logical,
        }
    }
}

/// Marked-state selection for sweeps.
#[derive(Debug, Clone, Copy)]
pub enum WSelector {
    /// A fixed basis index.
    Index(usize),
    /// Every basis state, one run each.
    All,
    /// One basis state drawn reproducibly from a seed.
    Seeded(u64),
}

/// One sweep point.
#[derive(Debug, Clone)]
pub struct FidelityRecord {
    pub n_logical: usize,
    pub total_time: f64,
    pub steps: usize,
    pub repetition: usize,
    pub schedule_kind: ScheduleKind,
    pub w_index: usize,
    pub fidelity: f64,
    /// Max weight outside the logical subspace over the run; full-space runs only.
    pub leakage: Option<f64>,
    pub wall_ms: f64,
}

/// Sweep configuration over (T, M) grids at fixed system size.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_logical: usize,
    pub coupling: f64,
    pub times: Vec<f64>,
    pub step_counts: Vec<usize>,
    pub k_rule: KRule,
    pub schedule_kind: ScheduleKind,
    pub w: WSelector,
    /// Run embedded in the full spin space, tracking logical-subspace leakage.
    pub full_space: bool,
    /// Grid size for the gap profile when the schedule is gap-optimized.
    pub gap_grid: usize,
}

impl SweepConfig {
    pub fn new(n_logical: usize, times: Vec<f64>, step_counts: Vec<usize>) -> Self {
        SweepConfig {
            n_logical,
            coupling: 1.0,
            times,
            step_counts,
            k_rule: KRule::Const(1),
            schedule_kind: ScheduleKind::Linear,
            w: WSelector::Seeded(7),
            full_space: false,
            gap_grid: 1024,
        }
    }
}

/// Run the fidelity sweep: one record per (T, M, w), deterministic order,
/// points executed in parallel.
pub fn fidelity_sweep(config: &SweepConfig) -> Result<Vec<FidelityRecord>> {
    if config.times.is_empty() || config.step_counts.is_empty() {
        return Err(CoreError::invalid("sweep needs non-empty T and M lists"));
    }
    if config.schedule_kind == ScheduleKind::Krotov {
        return Err(CoreError::invalid(
            "sweeps cover linear and gap-optimized switching; optimized schedules come from the optimizer",
        ));
    }
    let nl = config.n_logical;
    let dim = 1usize << nl;
    let w_list: Vec<usize> = match config.w {
        WSelector::Index(w) => {
            if w >= dim {
                return Err(CoreError::IndexOutOfRange {
                    what: "marked state",
                    index: w,
                    bound: dim,
                });
            }
            vec![w]
        }
        WSelector::All => (0..dim).collect(),
        WSelector::Seeded(seed) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            vec![rng.random_range(0..dim)]
        }
    };

    // profile once; it depends only on (n_l, J, w) through the oracle, and the
    // driver symmetry makes the spectrum w-independent, so one profile serves
    // every w
    let schedule_for = |t: f64, m: usize| -> Result<Schedule> {
        match config.schedule_kind {
            ScheduleKind::Linear => Schedule::linear(t, m),
            ScheduleKind::GapOptimized => {
                let hi = logical_initial_h(nl, config.coupling)?;
                let hf = oracle_operator(Space::Logical(nl), w_list[0])?;
                let profile = gap_profile(&hi, &hf, config.gap_grid)?;
                gap_schedule(&profile, t, m)
            }
            ScheduleKind::Krotov => unreachable!(),
        }
    };

    // precompute schedules serially (cheap next to the evolutions)
    let mut jobs: Vec<(f64, usize, usize, Schedule)> = Vec::new();
    for &t in &config.times {
        for &m in &config.step_counts {
            let schedule = schedule_for(t, m)?;
            for &w in &w_list {
                jobs.push((t, m, w, schedule.clone()));
            }
        }
    }

    let k = config.k_rule.value(nl);
    let records: Result<Vec<FidelityRecord>> = jobs
        .par_iter()
        .map(|(t, m, w, schedule)| {
            let start = Instant::now();
            let plan = schedule_coeffs(schedule).with_repetition(k)?;
            let (fidelity, leakage) = if config.full_space {
                run_full_space(nl, config.coupling, *w, &plan)?
            } else {
                (run_logical(nl, config.coupling, *w, &plan)?, None)
            };
            debug_assert!((-1e-12..=1.0 + 1e-12).contains(&fidelity));
            if let Some(l) = leakage {
                debug_assert!((-1e-12..=1.0 + 1e-12).contains(&l));
            }
            Ok(FidelityRecord {
                n_logical: nl,
                total_time: *t,
                steps: *m,
                repetition: k,
                schedule_kind: config.schedule_kind,
                w_index: *w,
                fidelity,
                leakage,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect();
    records
}

/// Oracle Hamiltonian -|w><w| for basis state w of a space.
pub fn oracle_operator(space: Space, w_index: usize) -> Result<Operator> {
    if w_index >= space.dim() {
        return Err(CoreError::IndexOutOfRange {
            what: "marked state",
            index: w_index,
            bound: space.dim(),
        });
    }
    let mut diag = vec![0.0; space.dim()];
    diag[w_index] = -1.0;
    Operator::from_real_diagonal(space, &diag)
}

fn run_logical(nl: usize, coupling: f64, w: usize, plan: &TrotterPlan) -> Result<f64> {
    let prop_i = logical_initial_propagator(nl, coupling)?;
    let space = Space::Logical(nl);
    let prop_f = Propagator::new(&oracle_operator(space, w)?)?;
    let psi0 = xxx_ground_state(nl)?;
    let out = trotter_evolve_prepared(&prop_i, &prop_f, plan, &psi0)?;
    Ok(out.probability(w))
}

fn run_full_space(
    nl: usize,
    coupling: f64,
    w: usize,
    plan: &TrotterPlan,
) -> Result<(f64, Option<f64>)> {
    let n = 2 * nl;
    let map = dfs_basis(n)?;
    let full = map.full_space();
    let prop_i = Propagator::pair_exchange(full, coupling)?;
    let w_full = map.logical_indices()[w];
    let prop_f = Propagator::new(&oracle_operator(full, w_full)?)?;
    let psi0 = embed(&xxx_ground_state(nl)?, full, &map)?;

    let logical_set: Vec<usize> = map.logical_indices().to_vec();
    let mut max_leakage: f64 = 0.0;
    let mut amps = psi0.amplitudes().clone();
    {
        let mut observe = |_l: usize, a: &DVector<C64>| {
            let kept: f64 = logical_set.iter().map(|&i| a[i].norm_sqr()).sum();
            max_leakage = max_leakage.max((1.0 - kept).max(0.0));
        };
        apply_plan(&prop_i, &prop_f, plan, &mut amps, Some(&mut observe));
    }
    let out = QuantumState::new(full, amps)?;
    Ok((out.probability(w_full), Some(max_leakage)))
}
