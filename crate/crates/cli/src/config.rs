//! Flat key=value configuration with file loading and command-line overrides.
//!
//! Config files are plain text: `key = value` lines, `#` comments, optional
//! `[section]` headers that only group lines visually (keys live in one flat
//! namespace). Every run echoes its full effective configuration into the
//! output header together with a content hash, so results are traceable to
//! their exact parameters.

use qdfs_core::aqc::ScheduleKind;
use qdfs_core::trotter::{KRule, WSelector};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Experiment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Basis,
    Spectrum,
    GroverCont,
    AqcRun,
    TrotterSweep,
    Schedule,
    Krotov,
    NoiseBench,
}

impl Experiment {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "basis" => Experiment::Basis,
            "spectrum" => Experiment::Spectrum,
            "grover-cont" => Experiment::GroverCont,
            "aqc-run" => Experiment::AqcRun,
            "trotter-sweep" => Experiment::TrotterSweep,
            "schedule" => Experiment::Schedule,
            "krotov" => Experiment::Krotov,
            "noise-bench" => Experiment::NoiseBench,
            other => return Err(ConfigError::new(format!("unknown experiment '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Basis => "basis",
            Experiment::Spectrum => "spectrum",
            Experiment::GroverCont => "grover-cont",
            Experiment::AqcRun => "aqc-run",
            Experiment::TrotterSweep => "trotter-sweep",
            Experiment::Schedule => "schedule",
            Experiment::Krotov => "krotov",
            Experiment::NoiseBench => "noise-bench",
        }
    }
}

/// Configuration error with a single-line message.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Default total-time chain: T(n_L) = 225 / sqrt(2)^(7 - n_L), anchored at
/// the 7-logical-qubit run.
pub fn default_time_chain(n_logical: usize) -> f64 {
    225.0 * 2.0_f64.powf((n_logical as f64 - 7.0) / 2.0)
}

/// Fully resolved experiment configuration with documented defaults.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Number of logical qubits (n = 2 n_l physical spins).
    pub n_logical: usize,
    pub coupling: f64,
    /// Total-time list; defaults to the single chain value for n_logical.
    pub times: Vec<f64>,
    /// Step-count list; defaults tied to the experiment.
    pub step_counts: Vec<usize>,
    pub k_rule: KRule,
    pub schedule_kind: ScheduleKind,
    pub w: WSelector,
    pub seed: u64,
    pub gap_grid: usize,
    /// Substeps per interval for continuous references; None = adaptive.
    pub substeps: Option<usize>,
    pub full_space: bool,
    /// Sample count for the continuous-search probability curve.
    pub time_samples: usize,
    // noise-bench knobs
    pub bath_kind: BathKind,
    pub bath_spins: usize,
    pub bath_coupling: f64,
    pub bath_field: f64,
    pub noise_amplitude: f64,
    pub correlation_time: f64,
    pub ensemble: usize,
    /// Strength of the symmetry-breaking stray X field in the negative control.
    pub stray_x: f64,
    // optimizer knobs
    pub max_iters: usize,
    pub convergence_eps: f64,
    /// None = the 50 M / T default.
    pub step_weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    Spin,
    Stochastic,
}

impl ExperimentConfig {
    /// Defaults for an experiment at 3 logical qubits.
    pub fn defaults(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            n_logical: 3,
            coupling: 1.0,
            times: Vec::new(),      // resolved per experiment
            step_counts: Vec::new(),
            k_rule: KRule::Const(1),
            schedule_kind: ScheduleKind::Linear,
            w: WSelector::Seeded(7),
            seed: 7,
            gap_grid: 1024,
            substeps: None,
            full_space: false,
            time_samples: 200,
            bath_kind: BathKind::Spin,
            bath_spins: 1,
            bath_coupling: qdfs_core::noise::DEFAULT_BATH_COUPLING,
            bath_field: qdfs_core::noise::DEFAULT_BATH_FIELD,
            noise_amplitude: qdfs_core::noise::DEFAULT_NOISE_AMPLITUDE,
            correlation_time: qdfs_core::noise::DEFAULT_CORRELATION_TIME,
            ensemble: 200,
            stray_x: 0.5,
            max_iters: 500,
            convergence_eps: 1e-7,
            step_weight: None,
        }
    }

    /// Load from an optional file, then apply `key=value` overrides in order.
    pub fn load(
        experiment: Experiment,
        path: Option<&Path>,
        overrides: &[String],
    ) -> Result<Self, ConfigError> {
        let mut config = ExperimentConfig::defaults(experiment);
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new(format!("cannot read config {path:?}: {e}")))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                    continue;
                }
                let (key, value) = split_pair(line).ok_or_else(|| {
                    ConfigError::new(format!(
                        "config line {} is not 'key = value': '{line}'",
                        lineno + 1
                    ))
                })?;
                config.apply(key, value)?;
            }
        }
        for item in overrides {
            let (key, value) = split_pair(item)
                .ok_or_else(|| ConfigError::new(format!("override '{item}' is not key=value")))?;
            config.apply(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError::new(format!("invalid {what}: '{value}'"));
        match key {
            "experiment" => self.experiment = Experiment::parse(value)?,
            "n_l" => self.n_logical = value.parse().map_err(|_| bad("n_l"))?,
            "n" => {
                let n: usize = value.parse().map_err(|_| bad("n"))?;
                if n % 2 != 0 {
                    return Err(ConfigError::new(format!("n must be even, got {n}")));
                }
                self.n_logical = n / 2;
            }
            "j" => self.coupling = value.parse().map_err(|_| bad("j"))?,
            "t" | "t_list" => {
                self.times = parse_list(value).map_err(|_| bad("t list"))?;
            }
            "m" | "m_list" => {
                self.step_counts = parse_list(value).map_err(|_| bad("m list"))?;
            }
            "k" => {
                self.k_rule = if value == "n_l" {
                    KRule::EqualLogicalQubits
                } else {
                    KRule::Const(value.parse().map_err(|_| bad("k"))?)
                };
            }
            "schedule" => {
                self.schedule_kind = match value {
                    "linear" => ScheduleKind::Linear,
                    "gap-optimized" => ScheduleKind::GapOptimized,
                    "krotov" => ScheduleKind::Krotov,
                    _ => return Err(bad("schedule kind")),
                };
            }
            "w" => {
                self.w = match value {
                    "all" => WSelector::All,
                    "seed" => WSelector::Seeded(self.seed),
                    _ => WSelector::Index(value.parse().map_err(|_| bad("w"))?),
                };
            }
            "seed" => {
                self.seed = value.parse().map_err(|_| bad("seed"))?;
                if matches!(self.w, WSelector::Seeded(_)) {
                    self.w = WSelector::Seeded(self.seed);
                }
            }
            "gap_grid" => self.gap_grid = value.parse().map_err(|_| bad("gap_grid"))?,
            "substeps" => {
                self.substeps = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("substeps"))?)
                };
            }
            "full_space" => self.full_space = parse_bool(value).ok_or_else(|| bad("full_space"))?,
            "time_samples" => self.time_samples = value.parse().map_err(|_| bad("time_samples"))?,
            "bath" => {
                self.bath_kind = match value {
                    "spin" => BathKind::Spin,
                    "stochastic" => BathKind::Stochastic,
                    _ => return Err(bad("bath kind")),
                };
            }
            "bath_spins" => self.bath_spins = value.parse().map_err(|_| bad("bath_spins"))?,
            "bath_g" => self.bath_coupling = value.parse().map_err(|_| bad("bath_g"))?,
            "bath_field" => self.bath_field = value.parse().map_err(|_| bad("bath_field"))?,
            "noise_amplitude" => {
                self.noise_amplitude = value.parse().map_err(|_| bad("noise_amplitude"))?
            }
            "correlation_time" => {
                self.correlation_time = value.parse().map_err(|_| bad("correlation_time"))?
            }
            "ensemble" => self.ensemble = value.parse().map_err(|_| bad("ensemble"))?,
            "stray_x" => self.stray_x = value.parse().map_err(|_| bad("stray_x"))?,
            "max_iters" => self.max_iters = value.parse().map_err(|_| bad("max_iters"))?,
            "convergence_eps" => {
                self.convergence_eps = value.parse().map_err(|_| bad("convergence_eps"))?
            }
            "step_weight" => {
                self.step_weight = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("step_weight"))?)
                };
            }
            other => return Err(ConfigError::new(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.n_logical == 0 {
            return Err(ConfigError::new("n_l must be at least 1"));
        }
        if self.coupling <= 0.0 {
            return Err(ConfigError::new("coupling j must be positive"));
        }
        Ok(())
    }

    /// Resolved time list: explicit, or the default chain value.
    pub fn effective_times(&self) -> Vec<f64> {
        if self.times.is_empty() {
            vec![default_time_chain(self.n_logical)]
        } else {
            self.times.clone()
        }
    }

    /// Resolved step-count list: explicit, or M = 2T rounded per time.
    pub fn effective_step_counts(&self) -> Vec<usize> {
        if self.step_counts.is_empty() {
            self.effective_times()
                .iter()
                .map(|t| (2.0 * t).round().max(1.0) as usize)
                .collect()
        } else {
            self.step_counts.clone()
        }
    }

    /// Full effective configuration as sorted key=value pairs for echoing.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.name().to_string());
        put("n_l", self.n_logical.to_string());
        put("n", (2 * self.n_logical).to_string());
        put("j", format!("{}", self.coupling));
        put(
            "t_list",
            join_list(&self.effective_times().iter().map(|t| format!("{t}")).collect::<Vec<_>>()),
        );
        put(
            "m_list",
            join_list(
                &self
                    .effective_step_counts()
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        put(
            "k",
            match self.k_rule {
                KRule::Const(k) => k.to_string(),
                KRule::EqualLogicalQubits => "n_l".to_string(),
            },
        );
        put("schedule", format!("{}", self.schedule_kind));
        put(
            "w",
            match self.w {
                WSelector::Index(i) => i.to_string(),
                WSelector::All => "all".to_string(),
                WSelector::Seeded(_) => "seed".to_string(),
            },
        );
        put("seed", self.seed.to_string());
        put("gap_grid", self.gap_grid.to_string());
        put(
            "substeps",
            self.substeps.map_or("auto".to_string(), |s| s.to_string()),
        );
        put("full_space", self.full_space.to_string());
        put("time_samples", self.time_samples.to_string());
        put(
            "bath",
            match self.bath_kind {
                BathKind::Spin => "spin".to_string(),
                BathKind::Stochastic => "stochastic".to_string(),
            },
        );
        put("bath_spins", self.bath_spins.to_string());
        put("bath_g", format!("{}", self.bath_coupling));
        put("bath_field", format!("{}", self.bath_field));
        put("noise_amplitude", format!("{}", self.noise_amplitude));
        put("correlation_time", format!("{}", self.correlation_time));
        put("ensemble", self.ensemble.to_string());
        put("stray_x", format!("{}", self.stray_x));
        put("max_iters", self.max_iters.to_string());
        put("convergence_eps", format!("{}", self.convergence_eps));
        put(
            "step_weight",
            self.step_weight.map_or("auto".to_string(), |s| format!("{s}")),
        );
        map
    }

    /// FNV-1a content hash of the canonical echo, identifying the exact
    /// effective configuration.
    pub fn content_hash(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        for (k, v) in self.echo() {
            for byte in k.bytes().chain([b'='].into_iter()).chain(v.bytes()).chain([b'\n']) {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
        format!("{hash:016x}")
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    Some((k.trim(), v.trim()))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, ()> {
    s.split(',')
        .map(|item| item.trim().parse::<T>().map_err(|_| ()))
        .collect()
}

fn join_list(items: &[String]) -> String {
    items.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_in_order() {
        let config = ExperimentConfig::load(
            Experiment::TrotterSweep,
            None,
            &["n_l=4".into(), "t_list=10,20".into(), "n_l=5".into()],
        )
        .unwrap();
        assert_eq!(config.n_logical, 5);
        assert_eq!(config.times, vec![10.0, 20.0]);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::load(Experiment::Basis, None, &["bogus=1".into()]);
        assert!(err.is_err());
    }

    #[test]
    fn default_chain_values() {
        assert!((default_time_chain(7) - 225.0).abs() < 1e-12);
        assert!((default_time_chain(5) - 112.5).abs() < 1e-12);
        assert!((default_time_chain(6) - 225.0 / 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::load(Experiment::Basis, None, &[]).unwrap();
        let b = ExperimentConfig::load(Experiment::Basis, None, &["n_l=4".into()]).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
        let c = ExperimentConfig::load(Experiment::Basis, None, &[]).unwrap();
        assert_eq!(a.content_hash(), c.content_hash());
    }
}
