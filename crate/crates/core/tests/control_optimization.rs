//! Optimizer invariants on desk-scale instances: monitored monotonicity,
//! exact clamping, strict improvement over gap-optimized seeds, and gradient
//! correctness against finite differences.

use qdfs_core::aqc::{gap_profile, gap_schedule, logical_initial_h, Schedule, ScheduleKind};
use qdfs_core::krotov::{
    gradient_check, krotov_optimize, objective, ControlProblem, KrotovConfig, MONITOR_SLACK,
};
use qdfs_core::trotter::oracle_operator;
use rand::{Rng, SeedableRng};

fn gap_seed(problem: &ControlProblem, total_time: f64, steps: usize) -> Schedule {
    let hi = logical_initial_h(problem.n_logical, problem.coupling).unwrap();
    let hf = oracle_operator(problem.space(), problem.w_index).unwrap();
    let profile = gap_profile(&hi, &hf, 512).unwrap();
    gap_schedule(&profile, total_time, steps).unwrap()
}

#[test]
fn optimization_monotone_and_clamped_across_instances() {
    for (nl, w, t) in [(2usize, 1usize, 10.0f64), (3, 5, 20.0), (4, 11, 40.0)] {
        let problem = ControlProblem::new(nl, w).unwrap();
        let steps = (2.0 * t).round() as usize;
        let seed = gap_seed(&problem, t, steps);
        let config = KrotovConfig::for_problem(steps, t);
        let trace = krotov_optimize(&problem, &seed, &config).unwrap();
        for pair in trace.objectives.windows(2) {
            assert!(
                pair[1] >= pair[0] - MONITOR_SLACK * config.convergence_eps,
                "monotonicity violated at n_L={nl}"
            );
        }
        for &s in trace.schedule.values() {
            assert!((0.0..=1.0).contains(&s), "clamp violated at n_L={nl}");
        }
        let seed_fidelity = objective(&problem, &seed).unwrap();
        assert!(
            trace.final_fidelity() > seed_fidelity,
            "no improvement at n_L={nl}: {} vs {}",
            trace.final_fidelity(),
            seed_fidelity
        );
        assert_eq!(trace.schedule.kind(), ScheduleKind::Krotov);
        // the fidelity curve ends at the reported objective
        let (tau_last, f_last) = *trace.fidelity_curve.last().unwrap();
        assert!((tau_last - 1.0).abs() < 1e-12);
        assert!((f_last - trace.final_fidelity()).abs() < 1e-12);
    }
}

#[test]
fn gradient_matches_finite_differences_on_random_schedules() {
    let problem = ControlProblem::new(2, 2).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
    let steps = 20;
    let values: Vec<f64> = (0..steps).map(|_| rng.random_range(0.05..0.95)).collect();
    let schedule = Schedule::new(ScheduleKind::Krotov, 10.0, values).unwrap();
    let mut coords: Vec<usize> = (0..steps).collect();
    // ten distinct random coordinates
    for i in 0..steps {
        let j = rng.random_range(0..steps);
        coords.swap(i, j);
    }
    for &l in coords.iter().take(10) {
        let err = gradient_check(&problem, &schedule, l, 1e-5).unwrap();
        assert!(err < 1e-4, "gradient check failed at l={l}: {err:.3e}");
    }
}

#[test]
fn seeded_from_gap_schedule_reaches_high_fidelity_small() {
    // small instance of the full pipeline: seed then optimize
    let nl = 3;
    let t = 225.0 * 2.0f64.powf((nl as f64 - 7.0) / 2.0);
    let steps = (2.0 * t).round() as usize;
    let problem = ControlProblem::new(nl, 2).unwrap();
    let seed = gap_seed(&problem, t, steps);
    let config = KrotovConfig::for_problem(steps, t);
    let trace = krotov_optimize(&problem, &seed, &config).unwrap();
    assert!(
        trace.final_fidelity() >= 0.999,
        "small pipeline reached only {}",
        trace.final_fidelity()
    );
}
