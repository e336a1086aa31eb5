//! Experiment runner: JSON configs in, CSV metrics and a JSON summary out.

pub mod config;
pub mod estimate;
pub mod run;

pub use config::{ExperimentConfig, Overrides, ProfileMethod};
pub use estimate::{estimate_vdist, hoeffding_budget, Estimate, EstimateMethod};
pub use run::{oracle_check, run_experiment, write_profiles, write_sets, MetricsReport, Summary, TrialRow};
