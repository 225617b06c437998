use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::dynamics::metrics::StepMetrics;
use crate::dynamics::{
    build_pfa, cascade, growth_probability, AngiogenicSwitch, CellState, DriverParams,
    PfaDefinition,
};
use crate::error::{Error, Result};
use crate::graph::{generate_er_with, grow_gnr_with, NodeId, TumorGraph};
use crate::record::RunRecord;
use crate::rng::{RngSeed, SimRng, DYNAMICS_STREAM, GRAPH_STREAM};
use crate::snapshot::{snapshot, GraphSnapshot};

/// Nodes to add at each step; steps past the end add nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GrowthPlan(Vec<usize>);

impl GrowthPlan {
    pub fn new(per_step: Vec<usize>) -> Self {
        GrowthPlan(per_step)
    }

    /// Spread `budget` nodes over `steps` steps, giving the remainder to the
    /// earliest steps.
    pub fn uniform(budget: usize, steps: usize) -> Self {
        if steps == 0 {
            return GrowthPlan(Vec::new());
        }
        let (base, extra) = (budget / steps, budget % steps);
        GrowthPlan((0..steps).map(|i| base + usize::from(i < extra)).collect())
    }

    pub fn at(&self, step_index: u64) -> usize {
        usize::try_from(step_index)
            .ok()
            .and_then(|i| self.0.get(i).copied())
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything needed to build a [`ModelState`] besides the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub initial_nodes: usize,
    pub er_edge_probability: f64,
    pub driver: DriverParams,
    pub switch: AngiogenicSwitch,
    #[serde(default)]
    pub growth_plan: GrowthPlan,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let p = self.er_edge_probability;
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::config(
                "er_edge_probability",
                format!("{p} is not a probability in [0, 1]"),
            ));
        }
        self.driver.validate().map_err(|e| e.within("driver"))?;
        self.switch.validate().map_err(|e| e.within("switch"))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellAgent {
    pub node: NodeId,
    pub state: CellState,
    pub steps_in_state: u32,
}

/// A live simulation: graph, one agent per node, parameters and generator.
#[derive(Debug, Clone)]
pub struct ModelState {
    config: ModelConfig,
    seed: RngSeed,
    graph: TumorGraph,
    agents: Vec<CellAgent>,
    switch: AngiogenicSwitch,
    pfa: PfaDefinition,
    p_redirect: f64,
    step_index: u64,
    rng: SimRng,
}

impl ModelState {
    /// Seed an Erdős–Rényi graph from `seed` and place agents on it.
    pub fn new(config: ModelConfig, seed: RngSeed) -> Result<Self> {
        config.validate()?;
        let graph = generate_er_with(
            config.initial_nodes,
            config.er_edge_probability,
            &mut seed.split(GRAPH_STREAM).rng(),
        )?;
        Self::from_graph(graph, config, seed)
    }

    /// Place agents on an existing graph. The dynamics stream still derives
    /// from `seed`, so several models may share one seed graph.
    pub fn from_graph(graph: TumorGraph, config: ModelConfig, seed: RngSeed) -> Result<Self> {
        config.validate()?;
        let p_redirect = growth_probability(&config.driver)?;
        let pfa = build_pfa(&config.switch);
        let mut rng = seed.split(DYNAMICS_STREAM).rng();
        let agents = graph
            .nodes()
            .map(|node| CellAgent {
                node,
                state: pfa.sample_initial(&mut rng),
                steps_in_state: 0,
            })
            .collect();
        Ok(ModelState {
            switch: config.switch,
            config,
            seed,
            graph,
            agents,
            pfa,
            p_redirect,
            step_index: 0,
            rng,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn graph(&self) -> &TumorGraph {
        &self.graph
    }

    pub fn agents(&self) -> &[CellAgent] {
        &self.agents
    }

    pub fn states(&self) -> Vec<CellState> {
        self.agents.iter().map(|a| a.state).collect()
    }

    pub fn switch(&self) -> &AngiogenicSwitch {
        &self.switch
    }

    pub fn pfa(&self) -> &PfaDefinition {
        &self.pfa
    }

    pub fn driver(&self) -> &DriverParams {
        &self.config.driver
    }

    pub fn p_redirect(&self) -> f64 {
        self.p_redirect
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn set_switch(&mut self, switch: AngiogenicSwitch) -> Result<()> {
        switch.validate()?;
        self.switch = switch;
        self.pfa = build_pfa(&switch);
        Ok(())
    }

    /// Overwrite agent states, e.g. to stage a scenario in tests.
    pub fn set_states(&mut self, states: &[CellState]) -> Result<()> {
        if states.len() != self.agents.len() {
            return Err(Error::Integrity(format!(
                "{} states supplied for {} agents",
                states.len(),
                self.agents.len()
            )));
        }
        for (agent, &state) in self.agents.iter_mut().zip(states) {
            agent.state = state;
            agent.steps_in_state = 0;
        }
        Ok(())
    }

    /// Grow `n_new` nodes with the driver's redirection probability and
    /// give each new node an agent drawn from the initial distribution.
    pub fn grow(&mut self, n_new: usize) -> Result<usize> {
        let added = grow_gnr_with(&mut self.graph, n_new, self.p_redirect, &mut self.rng)?;
        for index in added.clone() {
            let state = self.pfa.sample_initial(&mut self.rng);
            self.agents.push(CellAgent {
                node: NodeId(index),
                state,
                steps_in_state: 0,
            });
        }
        Ok(added.len())
    }

    /// One scheduler tick: shuffled asynchronous activation, then growth.
    pub fn step(&mut self) -> Result<StepMetrics> {
        let mut order: Vec<usize> = (0..self.agents.len()).collect();
        order.shuffle(&mut self.rng);
        for index in order {
            let state = self.agents[index].state;
            if state.is_absorbing() {
                self.agents[index].steps_in_state += 1;
                continue;
            }
            let pressure = match state {
                CellState::Normal | CellState::Inflamed => {
                    self.neighbor_inflammation(NodeId(index))
                }
                _ => 0.0,
            };
            let next = cascade(state, &self.switch, pressure)
                .fire(&mut self.rng)
                .map(|trial| trial.target);
            let agent = &mut self.agents[index];
            match next {
                Some(target) if target != state => {
                    agent.state = target;
                    agent.steps_in_state = 0;
                }
                _ => agent.steps_in_state += 1,
            }
        }

        let n_new = self.config.growth_plan.at(self.step_index);
        let added = if n_new > 0 { self.grow(n_new)? } else { 0 };
        self.step_index += 1;

        let mut metrics = analysis::population_metrics(self);
        metrics.n_added = added;
        Ok(metrics)
    }

    pub fn neighbor_inflammation(&self, node: NodeId) -> f64 {
        neighbor_inflammation(&self.graph, node, |v| self.agents[v.index()].state)
    }

    pub fn snapshot(&self) -> GraphSnapshot {
        snapshot(&self.graph, &self.states()).expect("one agent per node")
    }
}

/// Fraction of undirected neighbors that are inflamed or metastatic.
pub fn neighbor_inflammation(
    graph: &TumorGraph,
    node: NodeId,
    state_of: impl Fn(NodeId) -> CellState,
) -> f64 {
    let (mut total, mut inflamed) = (0usize, 0usize);
    for v in graph.undirected_neighbors(node) {
        total += 1;
        if state_of(v).is_inflammatory() {
            inflamed += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        inflamed as f64 / total as f64
    }
}

/// Step `model` `n_steps` times and attach the terminal snapshot and profile.
pub fn run(mut model: ModelState, n_steps: usize) -> Result<RunRecord> {
    let mut metrics = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        metrics.push(model.step()?);
    }
    let profile = match analysis::derived_cell_profile(model.graph(), 1) {
        Ok(profile) => Some(profile),
        Err(Error::UndefinedProfile { .. }) => None,
        Err(other) => return Err(other),
    };
    Ok(RunRecord {
        label: String::new(),
        repetition: 0,
        seed: model.seed(),
        config: model.config().clone(),
        metrics,
        final_snapshot: model.snapshot(),
        profile,
    })
}
