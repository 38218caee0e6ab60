//! Experiment harness: synthetic data generation, trial execution, parameter
//! sweeps, the built-in verification suite, and persistence.

pub mod config;
pub mod sweep;
pub mod trial;
pub mod verify;

pub use config::{ExperimentConfig, Mode, SCHEMA_VERSION};
pub use sweep::{sweep_and_report, SummaryStats, SweepConfig, SweepReport};
pub use trial::{gen_synthetic, run_trial, EngineSummary, TraceLine, TrialOutput, TrialResult};
pub use verify::{verify_suite, CheckResult, VerifyReport};
