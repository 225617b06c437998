//! Centrality and population readouts.
//!
//! Centralities are computed on the undirected view of the graph: an edge
//! `u -> v` connects `u` and `v` both ways. Pairs in different components
//! contribute nothing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dynamics::metrics::dead_inflamed_ratio;
use crate::dynamics::{CellState, ModelState, StepMetrics};
use crate::error::{Error, Result};
use crate::graph::{density, NodeId, TumorGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityMap {
    values: Vec<f64>,
    normalized: bool,
}

impl CentralityMap {
    pub fn get(&self, node: NodeId) -> f64 {
        self.values[node.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }

    /// The `k` highest-valued nodes, ties broken by ascending id.
    pub fn top(&self, k: usize) -> Vec<(NodeId, f64)> {
        let mut ranked: Vec<(NodeId, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| (NodeId(i), v))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

/// Unnormalized betweenness: for each unordered pair `{s, t}`, every
/// intermediate vertex gets the fraction of shortest `s`–`t` paths through it.
pub fn betweenness_raw(graph: &TumorGraph) -> CentralityMap {
    let adj = graph.undirected_adjacency();
    let n = adj.len();
    let mut centrality = vec![0.0f64; n];

    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];

    for source in 0..n {
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        sigma[source] = 1.0;
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != source {
                centrality[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both ends
    for c in &mut centrality {
        *c /= 2.0;
    }
    CentralityMap {
        values: centrality,
        normalized: false,
    }
}

/// Betweenness normalized by the `(n-1)(n-2)/2` pairs that exclude the
/// node itself. Graphs with fewer than three nodes are all zeros.
pub fn betweenness(graph: &TumorGraph) -> CentralityMap {
    let n = graph.node_count();
    if n < 3 {
        return CentralityMap {
            values: vec![0.0; n],
            normalized: true,
        };
    }
    let scale = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
    let mut map = betweenness_raw(graph);
    for c in &mut map.values {
        *c *= scale;
    }
    map.normalized = true;
    map
}

/// Closeness with component scaling: `(r-1)/Σd · (r-1)/(n-1)` where `r`
/// counts the nodes reachable from `v` (including `v`).
pub fn closeness(graph: &TumorGraph) -> CentralityMap {
    let adj = graph.undirected_adjacency();
    let n = adj.len();
    let mut values = vec![0.0; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    for (source, value) in values.iter_mut().enumerate() {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        let (mut reached, mut total) = (0usize, 0usize);
        while let Some(v) = queue.pop_front() {
            reached += 1;
            total += dist[v];
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if total > 0 && n > 1 {
            let others = (reached - 1) as f64;
            *value = others / total as f64 * (others / (n - 1) as f64);
        }
    }
    CentralityMap {
        values,
        normalized: true,
    }
}

/// The highest-betweenness node set of one growth pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedCellProfile {
    /// Every node attaining the maximum, ascending.
    pub derived_cell_ids: Vec<NodeId>,
    /// The maximal normalized betweenness.
    pub essential_genomic_profile: f64,
    /// Mean normalized betweenness over all nodes (diagnostic).
    pub mean_betweenness: f64,
    /// One-based growth-pattern index (GP1, GP2, ...).
    pub pattern_index: usize,
}

pub fn derived_cell_profile(
    graph: &TumorGraph,
    pattern_index: usize,
) -> Result<DerivedCellProfile> {
    let n = graph.node_count();
    if n < 3 {
        return Err(Error::UndefinedProfile { nodes: n });
    }
    let map = betweenness(graph);
    let best = map.max().expect("non-empty");
    let derived_cell_ids = map
        .values()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == best)
        .map(|(i, _)| NodeId(i))
        .collect();
    Ok(DerivedCellProfile {
        derived_cell_ids,
        essential_genomic_profile: best,
        mean_betweenness: map.mean(),
        pattern_index,
    })
}

/// Tally states at the current step boundary.
pub fn population_metrics(model: &ModelState) -> StepMetrics {
    let mut counts = [0usize; 6];
    for agent in model.agents() {
        counts[agent.state.index()] += 1;
    }
    let c = |s: CellState| counts[s.index()];
    StepMetrics {
        step: model.step_index(),
        n_nodes: model.graph().node_count(),
        n_normal: c(CellState::Normal),
        n_proliferative: c(CellState::Proliferative),
        n_inflamed: c(CellState::Inflamed),
        n_quiescent: c(CellState::Quiescent),
        n_metastatic: c(CellState::Metastatic),
        n_dead: c(CellState::Dead),
        n_added: 0,
        dead_inflamed_ratio: dead_inflamed_ratio(c(CellState::Dead), c(CellState::Inflamed)),
        density: density(model.graph()),
        p_redirect: model.p_redirect(),
    }
}
