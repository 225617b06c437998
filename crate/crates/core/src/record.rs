use serde::{Deserialize, Serialize};

use crate::analysis::DerivedCellProfile;
use crate::dynamics::{ModelConfig, StepMetrics};
use crate::rng::RngSeed;
use crate::snapshot::GraphSnapshot;

/// Outcome of one simulation run.
///
/// Contains no wall-clock data, so equal `(seed, config)` pairs produce
/// equal records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Baseline name, empty for ad-hoc runs.
    pub label: String,
    /// Zero-based repetition index within the baseline.
    pub repetition: usize,
    pub seed: RngSeed,
    pub config: ModelConfig,
    pub metrics: Vec<StepMetrics>,
    pub final_snapshot: GraphSnapshot,
    /// Absent when the final graph is too small to profile.
    pub profile: Option<DerivedCellProfile>,
}

impl RunRecord {
    pub fn final_metrics(&self) -> Option<&StepMetrics> {
        self.metrics.last()
    }
}
