use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    run, AngiogenicSwitch, DriverParams, GrowthPlan, ModelConfig, ModelState, DEFAULT_DIVISIONS,
    DEFAULT_DRIVER_MUTATIONS, DEFAULT_MUTATION_RATE,
};
use crate::error::{from_json_str, Error, Result};
use crate::graph::generate_er_with;
use crate::record::RunRecord;
use crate::rng::{RngSeed, GRAPH_STREAM};

pub const DEFAULT_REPETITIONS: usize = 3;
pub const DEFAULT_STEPS: usize = 50;
/// Expected Erdős–Rényi seed degree used when no edge probability is given.
pub const DEFAULT_SEED_DEGREE: f64 = 4.0;

/// Optional replacements for the driver-mutation defaults. `N` always comes
/// from the baseline's cancer stem cell count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

/// A patient-scale configuration: seed size, target size and the cancer
/// stem cells driving growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub name: String,
    pub initial_stem_cells: usize,
    pub target_cells: usize,
    pub cancer_stem_cells: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Defaults to `4 / (n - 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub er_edge_probability: Option<f64>,
    #[serde(default)]
    pub switch: AngiogenicSwitch,
    #[serde(default)]
    pub driver_overrides: DriverOverrides,
    #[serde(default)]
    pub master_seed: RngSeed,
    /// Share one seed graph across repetitions instead of drawing one each.
    #[serde(default)]
    pub reuse_seed_graph: bool,
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

impl BaselineConfig {
    pub fn new(
        name: &str,
        initial_stem_cells: usize,
        target_cells: usize,
        cancer_stem_cells: u64,
    ) -> Self {
        BaselineConfig {
            name: name.to_string(),
            initial_stem_cells,
            target_cells,
            cancer_stem_cells,
            repetitions: DEFAULT_REPETITIONS,
            steps: DEFAULT_STEPS,
            er_edge_probability: None,
            switch: AngiogenicSwitch::ASW1,
            driver_overrides: DriverOverrides::default(),
            master_seed: RngSeed(0),
            reuse_seed_graph: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_stem_cells == 0 {
            return Err(Error::config("initial_stem_cells", "must be at least 1"));
        }
        if self.target_cells < self.initial_stem_cells {
            return Err(Error::config(
                "target_cells",
                format!(
                    "{} is below initial_stem_cells {}",
                    self.target_cells, self.initial_stem_cells
                ),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        if self.steps == 0 && self.target_cells > self.initial_stem_cells {
            return Err(Error::config(
                "steps",
                "growth to the target needs at least one step",
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config(
                "name",
                "must be a non-empty label without path separators",
            ));
        }
        self.model_config().validate().map_err(|e| match e {
            Error::Config { field, message } if field.starts_with("driver.") => Error::Config {
                field: field.replacen("driver.", "driver_overrides.", 1),
                message,
            },
            other => other,
        })
    }

    pub fn edge_probability(&self) -> f64 {
        self.er_edge_probability
            .unwrap_or_else(|| match self.initial_stem_cells {
                0 | 1 => 0.0,
                n => (DEFAULT_SEED_DEGREE / (n - 1) as f64).min(1.0),
            })
    }

    pub fn driver(&self) -> DriverParams {
        DriverParams {
            u: self.driver_overrides.u.unwrap_or(DEFAULT_MUTATION_RATE),
            d: self.driver_overrides.d.unwrap_or(DEFAULT_DIVISIONS),
            k: self.driver_overrides.k.unwrap_or(DEFAULT_DRIVER_MUTATIONS),
            n_stem: self.cancer_stem_cells,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            initial_nodes: self.initial_stem_cells,
            er_edge_probability: self.edge_probability(),
            driver: self.driver(),
            switch: self.switch,
            growth_plan: GrowthPlan::uniform(
                self.target_cells.saturating_sub(self.initial_stem_cells),
                self.steps,
            ),
        }
    }

    pub fn repetition_seed(&self, index: usize) -> RngSeed {
        self.master_seed.split(index as u64)
    }

    pub fn with_seed(mut self, seed: RngSeed) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_switch(mut self, switch: AngiogenicSwitch) -> Self {
        self.switch = switch;
        self
    }
}

/// The four patient baselines, each under the first angiogenic switch.
pub fn builtin_baselines() -> Vec<BaselineConfig> {
    vec![
        BaselineConfig::new("P1", 200, 400, 50),
        BaselineConfig::new("P2", 400, 800, 200),
        BaselineConfig::new("P3", 600, 1200, 400),
        BaselineConfig::new("P4", 1200, 2400, 650),
    ]
}

pub fn builtin_switches() -> Vec<AngiogenicSwitch> {
    vec![
        AngiogenicSwitch::ASW1,
        AngiogenicSwitch::ASW2,
        AngiogenicSwitch::ASW3,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub fn run_baseline(config: &BaselineConfig) -> Result<Vec<RunRecord>> {
    run_baseline_with(config, Execution::Parallel)
}

/// Run every repetition of a baseline. Repetition `i` uses seed
/// `split(master_seed, i)` and reports its profile as pattern `i + 1`.
pub fn run_baseline_with(config: &BaselineConfig, execution: Execution) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let model_config = config.model_config();
    let shared_graph = if config.reuse_seed_graph {
        Some(generate_er_with(
            model_config.initial_nodes,
            model_config.er_edge_probability,
            &mut config.master_seed.split(GRAPH_STREAM).rng(),
        )?)
    } else {
        None
    };

    let one = |index: usize| -> Result<RunRecord> {
        let seed = config.repetition_seed(index);
        let model = match &shared_graph {
            Some(graph) => ModelState::from_graph(graph.clone(), model_config.clone(), seed),
            None => ModelState::new(model_config.clone(), seed),
        };
        let mut record =
            model
                .and_then(|m| run(m, config.steps))
                .map_err(|e| Error::Repetition {
                    index,
                    source: Box::new(e),
                })?;
        record.label = config.name.clone();
        record.repetition = index;
        if let Some(profile) = record.profile.as_mut() {
            profile.pattern_index = index + 1;
        }
        Ok(record)
    };

    match execution {
        Execution::Sequential => (0..config.repetitions).map(one).collect(),
        Execution::Parallel => (0..config.repetitions).into_par_iter().map(one).collect(),
    }
}

/// On-disk experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub switches: Vec<AngiogenicSwitch>,
    #[serde(default)]
    pub n_seeds: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = from_json_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.baseline.validate().map_err(|e| e.within("baseline"))?;
        for (i, switch) in self.switches.iter().enumerate() {
            switch
                .validate()
                .map_err(|e| e.within(&format!("switches[{i}]")))?;
        }
        if !self.switches.is_empty() && self.n_seeds == 0 {
            return Err(Error::config(
                "n_seeds",
                "a switch comparison needs at least one seed",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let b = builtin_baselines();
        let shape: Vec<_> = b
            .iter()
            .map(|c| {
                (
                    c.name.as_str(),
                    c.initial_stem_cells,
                    c.target_cells,
                    c.cancer_stem_cells,
                    c.repetitions,
                )
            })
            .collect();
        assert_eq!(
            shape,
            vec![
                ("P1", 200, 400, 50, 3),
                ("P2", 400, 800, 200, 3),
                ("P3", 600, 1200, 400, 3),
                ("P4", 1200, 2400, 650, 3)
            ]
        );
        let s = builtin_switches();
        assert_eq!(s[0].angiogenesis, 0.6);
        assert_eq!(s[1].angioprevention, 0.6);
        assert_eq!(s[2].quiescent, 0.8);
    }

    #[test]
    fn default_edge_probability_targets_degree_four() {
        let p1 = &builtin_baselines()[0];
        assert_eq!(p1.edge_probability(), 4.0 / 199.0);
        assert_eq!(BaselineConfig::new("x", 3, 3, 1).edge_probability(), 1.0);
    }

    #[test]
    fn small_baseline_reaches_target() {
        let mut config = BaselineConfig::new("T", 20, 45, 5);
        config.steps = 7;
        let records = run_baseline(&config).unwrap();
        assert_eq!(records.len(), 3);
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.metrics.len(), 7);
            assert_eq!(r.final_snapshot.node_count, 45);
            assert_eq!(r.repetition, i);
            assert_eq!(r.profile.as_ref().unwrap().pattern_index, i + 1);
            assert_eq!(r.seed, config.repetition_seed(i));
        }
    }

    #[test]
    fn single_repetition() {
        let mut config = BaselineConfig::new("T", 10, 12, 5);
        config.repetitions = 1;
        config.steps = 2;
        assert_eq!(run_baseline(&config).unwrap().len(), 1);
    }

    #[test]
    fn reuse_seed_graph_shares_initial_edges() {
        let mut config = BaselineConfig::new("T", 30, 30, 5);
        config.steps = 1;
        config.reuse_seed_graph = true;
        let records = run_baseline(&config).unwrap();
        assert!(records
            .windows(2)
            .all(|w| w[0].final_snapshot.links == w[1].final_snapshot.links));
        config.reuse_seed_graph = false;
        let records = run_baseline(&config).unwrap();
        assert_ne!(
            records[0].final_snapshot.links,
            records[1].final_snapshot.links
        );
    }

    #[test]
    fn validation_paths() {
        let mut c = BaselineConfig::new("T", 10, 5, 5);
        assert!(
            matches!(c.validate(), Err(Error::Config { field, .. }) if field == "target_cells")
        );
        c.target_cells = 20;
        c.driver_overrides.u = Some(3.0);
        assert!(
            matches!(c.validate(), Err(Error::Config { field, .. }) if field == "driver_overrides.u")
        );
        c.driver_overrides.u = None;
        c.switch.angiogenesis = -1.0;
        assert!(
            matches!(c.validate(), Err(Error::Config { field, .. }) if field == "switch.angiogenesis")
        );
    }

    #[test]
    fn experiment_config_diagnostics() {
        let bad_range = r#"{"baseline": {"name": "P1", "initial_stem_cells": 200, "target_cells": 400,
            "cancer_stem_cells": 50, "switch": {"angioprevention": 0.4, "angiogenesis": 1.6, "quiescent": 0.2}},
            "switches": [], "n_seeds": 0, "out_dir": "x"}"#;
        match ExperimentConfig::from_json(bad_range) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "baseline.switch.angiogenesis"),
            other => panic!("{other:?}"),
        }
        let bad_type = r#"{"baseline": {"name": "P1", "initial_stem_cells": "many"}}"#;
        match ExperimentConfig::from_json(bad_type) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "baseline.initial_stem_cells"),
            other => panic!("{other:?}"),
        }
    }
}
