//! Experiment execution and CSV output.
//!
//! Every output file starts with a commented header (tool version, the full
//! effective configuration, and its content hash), followed by one CSV header
//! row and data rows. Fidelity-sweep outputs use the fixed column set
//! `experiment,n_l,T,M,K,schedule,w,fidelity,leakage,wall_ms`; listing-style
//! experiments document their own columns. Bodies are deterministic for fixed
//! seeds, except the informational wall_ms column.

use crate::config::{BathKind, Experiment, ExperimentConfig};
use qdfs_core::aqc::{
    adiabatic_evolve, adiabatic_reference, gap_profile, gap_schedule, logical_initial_h,
    xxx_ground_state, Schedule, ScheduleKind,
};
use qdfs_core::dfs::dfs_basis;
use qdfs_core::grover::{
    grover_h, peak_time, probability_period, success_probability, uniform_state, GroverInstance,
};
use qdfs_core::krotov::{krotov_optimize, objective, ControlProblem, KrotovConfig};
use qdfs_core::noise::{protection_report, BathModel, PiecewiseProtocol};
use qdfs_core::space::pattern;
use qdfs_core::spinlab::{pauli, Pauli, Propagator};
use qdfs_core::trotter::{fidelity_sweep, oracle_operator, FidelityRecord, SweepConfig, WSelector};
use qdfs_core::{CoreError, Space};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Runner failure: either bad configuration or an error from the core.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Core(CoreError),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "{msg}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Core(e)
    }
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 for dimension
    /// guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(CoreError::DimensionGuard { .. }) => 3,
            _ => 1,
        }
    }
}

/// Run the configured experiment, writing its output file(s) under `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let body = match config.experiment {
        Experiment::Basis => basis_csv(config)?,
        Experiment::Spectrum => spectrum_csv(config)?,
        Experiment::GroverCont => grover_cont_csv(config)?,
        Experiment::AqcRun => aqc_run_csv(config)?,
        Experiment::TrotterSweep => trotter_sweep_csv(config)?,
        Experiment::Schedule => schedule_csv(config)?,
        Experiment::Krotov => return krotov_files(config, out),
        Experiment::NoiseBench => noise_bench_csv(config)?,
    };
    write_csv(out, config, &body)
}

fn write_csv(path: &Path, config: &ExperimentConfig, body: &str) -> Result<(), RunError> {
    let mut text = header(config);
    text.push_str(body);
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("cannot write {path:?}: {e}")))
}

fn header(config: &ExperimentConfig) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# tool = qdfs {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in config.echo() {
        let _ = writeln!(h, "# {k} = {v}");
    }
    let _ = writeln!(h, "# tol_norm = {}", qdfs_core::tol::NORM_PRESERVATION);
    let _ = writeln!(h, "# tol_hermiticity = {}", qdfs_core::tol::HERMITICITY);
    let _ = writeln!(h, "# tol_eig_residual = {}", qdfs_core::tol::EIG_RESIDUAL);
    let _ = writeln!(h, "# tol_symmetry = {}", qdfs_core::tol::SYMMETRY_COMMUTATOR);
    let _ = writeln!(h, "# config_hash = {}", config.content_hash());
    h
}

/// Marked-state list resolved from the selector for an n_logical-qubit space.
fn resolve_w(config: &ExperimentConfig) -> Result<Vec<usize>, RunError> {
    let dim = 1usize << config.n_logical;
    Ok(match config.w {
        WSelector::Index(w) => {
            if w >= dim {
                return Err(RunError::Config(format!(
                    "marked state {w} out of range for {} logical qubits",
                    config.n_logical
                )));
            }
            vec![w]
        }
        WSelector::All => (0..dim).collect(),
        WSelector::Seeded(seed) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            vec![rng.random_range(0..dim)]
        }
    })
}

fn basis_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let n = 2 * config.n_logical;
    let map = dfs_basis(n)?;
    let mut body = String::from("kind,position,basis_int,pattern\n");
    for (pos, &b) in map.dfs_indices().iter().enumerate() {
        let _ = writeln!(body, "sector,{pos},{b},{}", pattern(b, n));
    }
    for (pos, &b) in map.logical_indices().iter().enumerate() {
        let _ = writeln!(body, "logical,{pos},{b},{}", pattern(b, n));
    }
    Ok(body)
}

fn spectrum_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let nl = config.n_logical;
    let w = resolve_w(config)?[0];
    let hi = logical_initial_h(nl, config.coupling)?;
    let hf = oracle_operator(Space::Logical(nl), w)?;
    let profile = gap_profile(&hi, &hf, config.gap_grid)?;
    let mut body = String::from("s,e0,e1,gap\n");
    for (i, &s) in profile.grid().iter().enumerate() {
        let _ = writeln!(
            body,
            "{s},{},{},{}",
            profile.ground()[i],
            profile.excited()[i],
            profile.gap(i)
        );
    }
    Ok(body)
}

fn grover_cont_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let nl = config.n_logical;
    let space = Space::Logical(nl);
    let w = resolve_w(config)?[0];
    let inst = GroverInstance::new(space, w)?;
    let h = grover_h(&inst);
    let prop = Propagator::new(&h)?;
    let s = uniform_state(space);
    let target = inst.marked_state();
    let n_dim = inst.search_dim();
    let horizon = config
        .times
        .first()
        .copied()
        .unwrap_or_else(|| probability_period(n_dim));
    let mut body = String::new();
    let _ = writeln!(body, "# peak_time = {}", peak_time(n_dim));
    let _ = writeln!(body, "# probability_period = {}", probability_period(n_dim));
    body.push_str("t,p_numeric,p_analytic,abs_err\n");
    for k in 0..=config.time_samples {
        let t = horizon * k as f64 / config.time_samples as f64;
        let evolved = prop.apply(&s, t)?;
        let numeric = target.overlap(&evolved)?.norm_sqr();
        let analytic = success_probability(t, n_dim);
        let _ = writeln!(body, "{t},{numeric},{analytic},{}", (numeric - analytic).abs());
    }
    Ok(body)
}

const RECORD_COLUMNS: &str = "experiment,n_l,T,M,K,schedule,w,fidelity,leakage,wall_ms";

fn record_row(experiment: &str, r: &FidelityRecord) -> String {
    let leakage = r
        .leakage
        .map(|l| format!("{l}"))
        .unwrap_or_default();
    format!(
        "{experiment},{},{},{},{},{},{},{},{leakage},{:.3}\n",
        r.n_logical,
        r.total_time,
        r.steps,
        r.repetition,
        r.schedule_kind,
        r.w_index,
        r.fidelity,
        r.wall_ms
    )
}

fn aqc_run_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let nl = config.n_logical;
    let hi = logical_initial_h(nl, config.coupling)?;
    let w_list = resolve_w(config)?;
    let mut body = format!("{RECORD_COLUMNS}\n");
    for &t in &config.effective_times() {
        for &m in &config.effective_step_counts() {
            for &w in &w_list {
                let started = Instant::now();
                let hf = oracle_operator(Space::Logical(nl), w)?;
                let schedule = build_schedule(config, &hi, &hf, t, m)?;
                let psi0 = xxx_ground_state(nl)?;
                let out = match config.substeps {
                    Some(sub) => adiabatic_evolve(&hi, &hf, &schedule, sub, &psi0)?,
                    None => adiabatic_reference(&hi, &hf, &schedule, &psi0, 1e-8)?.0,
                };
                let record = FidelityRecord {
                    n_logical: nl,
                    total_time: t,
                    steps: m,
                    repetition: 0, // continuous evolution, no splitting
                    schedule_kind: schedule.kind(),
                    w_index: w,
                    fidelity: out.probability(w),
                    leakage: None,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                };
                body.push_str(&record_row("aqc-run", &record));
            }
        }
    }
    Ok(body)
}

fn build_schedule(
    config: &ExperimentConfig,
    hi: &qdfs_core::Operator,
    hf: &qdfs_core::Operator,
    t: f64,
    m: usize,
) -> Result<Schedule, RunError> {
    Ok(match config.schedule_kind {
        ScheduleKind::Linear => Schedule::linear(t, m)?,
        ScheduleKind::GapOptimized => {
            let profile = gap_profile(hi, hf, config.gap_grid)?;
            gap_schedule(&profile, t, m)?
        }
        ScheduleKind::Krotov => {
            return Err(RunError::Config(
                "optimized schedules come from the krotov experiment".into(),
            ))
        }
    })
}

fn trotter_sweep_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let sweep = SweepConfig {
        n_logical: config.n_logical,
        coupling: config.coupling,
        times: config.effective_times(),
        step_counts: config.effective_step_counts(),
        k_rule: config.k_rule,
        schedule_kind: config.schedule_kind,
        w: config.w,
        full_space: config.full_space,
        gap_grid: config.gap_grid,
    };
    warn_if_outside_splitting_regime(config)?;
    let records = fidelity_sweep(&sweep)?;
    let mut body = format!("{RECORD_COLUMNS}\n");
    for r in &records {
        body.push_str(&record_row("trotter-sweep", r));
    }
    Ok(body)
}

/// Advisory from the splitting validity indicator dt * ||H_i - H_f||: warn
/// (never error) when the coarsest plan in the sweep leaves the regime where
/// the product formula is trustworthy.
fn warn_if_outside_splitting_regime(config: &ExperimentConfig) -> Result<(), RunError> {
    let nl = config.n_logical;
    let hi = logical_initial_h(nl, config.coupling)?;
    let hf = oracle_operator(Space::Logical(nl), 0)?;
    let coarsest_m = *config
        .effective_step_counts()
        .iter()
        .min()
        .expect("validated non-empty");
    let longest_t = config
        .effective_times()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let plan = qdfs_core::trotter::linear_coeffs(longest_t, coarsest_m)?;
    let indicator = qdfs_core::trotter::splitting_validity(&hi, &hf, &plan)?;
    if indicator >= 1.0 {
        eprintln!(
            "warning: dt * ||H_i - H_f|| = {indicator:.2} at the coarsest grid point; \
             splitting error may dominate there"
        );
    }
    Ok(())
}

fn schedule_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let nl = config.n_logical;
    let w = resolve_w(config)?[0];
    let hi = logical_initial_h(nl, config.coupling)?;
    let hf = oracle_operator(Space::Logical(nl), w)?;
    let t = config.effective_times()[0];
    let m = config.effective_step_counts()[0];
    let kind = match config.schedule_kind {
        ScheduleKind::Linear => ScheduleKind::Linear,
        _ => ScheduleKind::GapOptimized,
    };
    let schedule = match kind {
        ScheduleKind::Linear => Schedule::linear(t, m)?,
        _ => {
            let profile = gap_profile(&hi, &hf, config.gap_grid)?;
            gap_schedule(&profile, t, m)?
        }
    };
    let mut body = String::from("l,t,s\n");
    let dt = schedule.dt();
    for (idx, &s) in schedule.values().iter().enumerate() {
        let _ = writeln!(body, "{},{},{s}", idx + 1, (idx + 1) as f64 * dt);
    }
    Ok(body)
}

fn krotov_files(config: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    let nl = config.n_logical;
    let w = resolve_w(config)?[0];
    let t = config.effective_times()[0];
    let m = config.effective_step_counts()[0];
    let problem = ControlProblem {
        n_logical: nl,
        coupling: config.coupling,
        repetition: match config.k_rule {
            qdfs_core::trotter::KRule::Const(k) => k,
            qdfs_core::trotter::KRule::EqualLogicalQubits => nl,
        },
        w_index: w,
    };
    let hi = logical_initial_h(nl, config.coupling)?;
    let hf = oracle_operator(Space::Logical(nl), w)?;
    let profile = gap_profile(&hi, &hf, config.gap_grid)?;
    let seed_schedule = gap_schedule(&profile, t, m)?;
    let seed_fidelity = objective(&problem, &seed_schedule)?;
    let mut krotov_config = KrotovConfig::for_problem(m, t);
    krotov_config.max_iters = config.max_iters;
    krotov_config.convergence_eps = config.convergence_eps;
    if let Some(weight) = config.step_weight {
        krotov_config.step_weight = weight;
    }
    let trace = krotov_optimize(&problem, &seed_schedule, &krotov_config)?;

    // objective trace
    let mut body = String::new();
    let _ = writeln!(body, "# seed_fidelity = {seed_fidelity}");
    let _ = writeln!(body, "# final_fidelity = {}", trace.final_fidelity());
    let _ = writeln!(body, "# step_weight_used = {}", trace.step_weight_used);
    let _ = writeln!(body, "# weight_adjustments = {}", trace.weight_adjustments);
    body.push_str("iteration,objective\n");
    for (iter, obj) in trace.objectives.iter().enumerate() {
        let _ = writeln!(body, "{iter},{obj}");
    }
    write_csv(out, config, &body)?;

    // optimized schedule next to the seed
    let mut sched_body = String::from("l,t,s_optimized,s_seed\n");
    let dt = trace.schedule.dt();
    for (idx, (&s_opt, &s_seed)) in trace
        .schedule
        .values()
        .iter()
        .zip(seed_schedule.values())
        .enumerate()
    {
        let _ = writeln!(sched_body, "{},{},{s_opt},{s_seed}", idx + 1, (idx + 1) as f64 * dt);
    }
    write_csv(&sibling(out, "schedule"), config, &sched_body)?;

    // fidelity curve of the final trajectory
    let mut curve_body = String::from("tau,fidelity\n");
    for (tau, f) in &trace.fidelity_curve {
        let _ = writeln!(curve_body, "{tau},{f}");
    }
    write_csv(&sibling(out, "curve"), config, &curve_body)?;
    Ok(())
}

/// `out.csv` -> `out.<tag>.csv`
fn sibling(out: &Path, tag: &str) -> std::path::PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn noise_bench_csv(config: &ExperimentConfig) -> Result<String, RunError> {
    let n = 2 * config.n_logical;
    let w = resolve_w(config)?[0];
    let bath = match config.bath_kind {
        BathKind::Spin => BathModel::SpinBath {
            bath_spins: config.bath_spins,
            coupling: config.bath_coupling,
            field: config.bath_field,
        },
        BathKind::Stochastic => BathModel::Stochastic {
            amplitude: config.noise_amplitude,
            correlation_time: config.correlation_time,
            ensemble: config.ensemble,
            seed: config.seed,
        },
    };
    let duration = config.times.first().copied();
    let protected = PiecewiseProtocol::continuous_grover(n, w, duration)?;
    let mut body =
        String::from("scenario,fidelity_with_bath,fidelity_without,difference,max_purity_loss,symmetric\n");
    let report = protection_report(&protected, &bath)?;
    let _ = writeln!(
        body,
        "protected,{},{},{},{},{}",
        report.fidelity_with_bath,
        report.fidelity_without_bath,
        report.fidelity_difference,
        report.max_purity_loss,
        report.symmetric
    );
    if config.stray_x > 0.0 {
        let stray = pauli(Pauli::X, 0, n)?.scaled(config.stray_x);
        let broken = PiecewiseProtocol::continuous_grover(n, w, duration)?
            .with_extra_term(&stray)?;
        let report = protection_report(&broken, &bath)?;
        let _ = writeln!(
            body,
            "symmetry-broken,{},{},{},{},{}",
            report.fidelity_with_bath,
            report.fidelity_without_bath,
            report.fidelity_difference,
            report.max_purity_loss,
            report.symmetric
        );
    }
    Ok(body)
}
