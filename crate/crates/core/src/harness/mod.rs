//! Parametric executions over the patient baselines and angiogenic switches.

mod baseline;
mod comparison;
pub mod output;
mod stats;
mod tables;

pub use baseline::{
    builtin_baselines, builtin_switches, run_baseline, run_baseline_with, BaselineConfig,
    DriverOverrides, Execution, ExperimentConfig, DEFAULT_REPETITIONS, DEFAULT_SEED_DEGREE,
    DEFAULT_STEPS,
};
pub use comparison::{
    replicate_seed, run_switch_comparison, ComparisonRow, ReplicateFinal, SwitchComparison,
};
pub use output::{ArtifactDir, Manifest, SeedEntry};
pub use stats::{Quartiles, SignTest};
pub use tables::{
    emit_profile_tables, format_ids, format_sci, ProfileColumn, ProfileTable, ProfileTables,
};
