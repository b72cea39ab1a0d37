//! Library surface of the experiment runner, exposed so integration tests can
//! drive the experiments and the verification suite directly.

pub mod config;
pub mod experiments;
pub mod verify;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{run, RunError};
pub use verify::{run_suite, CriterionReport, Suite};
