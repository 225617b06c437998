//! Tumor dynamics: the driver-mutation growth probability, the angiogenic
//! switch automaton and the agent scheduler that couples them to the graph.

mod driver;
pub mod metrics;
mod model;
mod pfa;

pub use driver::{
    growth_probability, DriverParams, DEFAULT_DIVISIONS, DEFAULT_DRIVER_MUTATIONS,
    DEFAULT_MUTATION_RATE,
};
pub use metrics::{
    metrics_csv_string, read_metrics_csv, write_metrics_csv, MetricsCsvRow, StepMetrics,
    METRICS_CSV_HEADER,
};
pub use model::{neighbor_inflammation, run, CellAgent, GrowthPlan, ModelConfig, ModelState};
pub use pfa::{
    build_pfa, build_pfa_with_neighbor, cascade, transition_trial, AngiogenicSwitch, Cascade,
    CellState, PfaDefinition, PfaTransition, SwitchFactor, Trial,
};
