//! The directed cell graph: storage, Erdős–Rényi seeding and growth with
//! redirection.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Dense node index, assigned in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How a node entered the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Seed,
    Grown,
}

/// Directed simple graph with in/out adjacency.
///
/// Out-neighbor lists keep insertion order; redirection picks an index into
/// them, so the order is part of the reproducibility contract.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TumorGraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    origin: Vec<Origin>,
    edge_count: usize,
}

impl TumorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph of `n` isolated nodes with the given origin.
    pub fn with_nodes(n: usize, origin: Origin) -> Self {
        TumorGraph {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            origin: vec![origin; n],
            edge_count: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.origin.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId)
    }

    pub fn add_node(&mut self, origin: Origin) -> NodeId {
        let id = NodeId(self.node_count());
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.origin.push(origin);
        id
    }

    /// Insert `src -> dst`. Rejects self-loops, duplicates and unknown ids.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId) -> Result<()> {
        let n = self.node_count();
        if src.0 >= n || dst.0 >= n {
            return Err(Error::Integrity(format!(
                "edge {src}->{dst} references a node outside 0..{n}"
            )));
        }
        if src == dst {
            return Err(Error::Integrity(format!("self-loop on node {src}")));
        }
        if self.out_adj[src.0].contains(&dst) {
            return Err(Error::Integrity(format!("duplicate edge {src}->{dst}")));
        }
        self.out_adj[src.0].push(dst);
        self.in_adj[dst.0].push(src);
        self.edge_count += 1;
        Ok(())
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.out_adj
            .get(src.0)
            .is_some_and(|out| out.contains(&dst))
    }

    pub fn out_neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.out_adj[node.0]
    }

    pub fn in_neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.in_adj[node.0]
    }

    /// Neighbors in the undirected view. Reciprocal edges are listed once.
    pub fn undirected_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let out = &self.out_adj[node.0];
        out.iter().copied().chain(
            self.in_adj[node.0]
                .iter()
                .copied()
                .filter(move |v| !out.contains(v)),
        )
    }

    pub fn origin(&self, node: NodeId) -> Origin {
        self.origin[node.0]
    }

    /// All edges, ordered by source id then out-list order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(src, out)| out.iter().map(move |&dst| (NodeId(src), dst)))
    }

    /// Undirected adjacency lists as plain indices, deduplicated and sorted.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for (src, dst) in self.edges() {
            adj[src.0].push(dst.0);
            adj[dst.0].push(src.0);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

fn check_probability(field: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("{p} is not a probability in [0, 1]"),
        ))
    }
}

/// Erdős–Rényi G(n, p) with each unordered pair stored as one edge from the
/// lower to the higher id. All nodes are marked [`Origin::Seed`].
pub fn generate_er(n: usize, p_edge: f64, seed: RngSeed) -> Result<TumorGraph> {
    generate_er_with(n, p_edge, &mut seed.rng())
}

pub fn generate_er_with<R: Rng + ?Sized>(n: usize, p_edge: f64, rng: &mut R) -> Result<TumorGraph> {
    check_probability("p_edge", p_edge)?;
    let mut graph = TumorGraph::with_nodes(n, Origin::Seed);
    for i in 0..n {
        for j in (i + 1)..n {
            // gen::<f64>() is in [0, 1), so p = 1 always succeeds and p = 0 never does.
            if rng.gen::<f64>() < p_edge {
                graph.out_adj[i].push(NodeId(j));
                graph.in_adj[j].push(NodeId(i));
                graph.edge_count += 1;
            }
        }
    }
    Ok(graph)
}

/// Grow `n_new` nodes by attachment with redirection.
///
/// Each new node `v` picks a target uniformly among the nodes that existed
/// before it. With probability `p_redirect` the link is moved to a uniformly
/// chosen out-neighbor of the target (kept on the target if it has none).
/// The single edge `v -> chosen` is added. Returns the ids of the new nodes.
pub fn grow_gnr(
    graph: &mut TumorGraph,
    n_new: usize,
    p_redirect: f64,
    seed: RngSeed,
) -> Result<Range<usize>> {
    grow_gnr_with(graph, n_new, p_redirect, &mut seed.rng())
}

pub fn grow_gnr_with<R: Rng + ?Sized>(
    graph: &mut TumorGraph,
    n_new: usize,
    p_redirect: f64,
    rng: &mut R,
) -> Result<Range<usize>> {
    check_probability("p_redirect", p_redirect)?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let start = graph.node_count();
    for _ in 0..n_new {
        let existing = graph.node_count();
        let target = NodeId(uniform_index(rng, existing));
        let redirect = rng.gen::<f64>() < p_redirect;
        let chosen = match graph.out_neighbors(target) {
            out if redirect && !out.is_empty() => out[uniform_index(rng, out.len())],
            _ => target,
        };
        let v = graph.add_node(Origin::Grown);
        graph.out_adj[v.0].push(chosen);
        graph.in_adj[chosen.0].push(v);
        graph.edge_count += 1;
    }
    Ok(start..graph.node_count())
}

/// Directed density `m / (n (n - 1))`; zero for fewer than two nodes.
pub fn density(graph: &TumorGraph) -> f64 {
    let n = graph.node_count();
    if n < 2 {
        return 0.0;
    }
    graph.edge_count() as f64 / (n as f64 * (n - 1) as f64)
}

/// Uniform index in `0..len`, sampled through `u64` so the draw is the same
/// on 32- and 64-bit targets.
pub(crate) fn uniform_index<R: Rng + ?Sized>(rng: &mut R, len: usize) -> usize {
    rng.gen_range(0..len as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> TumorGraph {
        generate_er(n, 1.0, RngSeed(0)).unwrap()
    }

    #[test]
    fn er_trivial_cases() {
        let g = generate_er(1, 0.7, RngSeed(3)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        let g = complete(5);
        assert_eq!((g.node_count(), g.edge_count()), (5, 10));
        assert!(g.edges().all(|(s, d)| s < d));
        assert!(g.nodes().all(|v| g.origin(v) == Origin::Seed));
        assert_eq!(generate_er(0, 0.5, RngSeed(1)).unwrap().node_count(), 0);
    }

    #[test]
    fn er_extremes_exhaustive() {
        for n in 0..=50 {
            assert_eq!(
                generate_er(n, 0.0, RngSeed(n as u64)).unwrap().edge_count(),
                0
            );
            assert_eq!(
                generate_er(n, 1.0, RngSeed(n as u64)).unwrap().edge_count(),
                n * n.saturating_sub(1) / 2
            );
        }
    }

    #[test]
    fn er_rejects_bad_probability() {
        for p in [-0.1, 1.5, f64::NAN] {
            match generate_er(4, p, RngSeed(0)) {
                Err(Error::Config { field, .. }) => assert_eq!(field, "p_edge"),
                other => panic!("expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn gnr_zero_growth_is_identity() {
        let mut g = generate_er(10, 0.3, RngSeed(5)).unwrap();
        let before = g.clone();
        let added = grow_gnr(&mut g, 0, 0.5, RngSeed(9)).unwrap();
        assert!(added.is_empty());
        assert_eq!(g, before);
    }

    #[test]
    fn gnr_rejects_empty_graph() {
        let mut g = TumorGraph::new();
        assert!(matches!(
            grow_gnr(&mut g, 3, 0.5, RngSeed(0)),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn gnr_full_redirection_on_single_root_attaches_to_root() {
        for seed in 0..200 {
            let mut g = TumorGraph::with_nodes(1, Origin::Seed);
            grow_gnr(&mut g, 10, 1.0, RngSeed(seed)).unwrap();
            for v in 1..11 {
                assert_eq!(g.out_neighbors(NodeId(v)), &[NodeId(0)]);
            }
        }
    }

    #[test]
    fn add_edge_rejects_invalid() {
        let mut g = TumorGraph::with_nodes(2, Origin::Seed);
        assert!(g.add_edge(NodeId(0), NodeId(0)).is_err());
        assert!(g.add_edge(NodeId(0), NodeId(2)).is_err());
        g.add_edge(NodeId(0), NodeId(1)).unwrap();
        assert!(g.add_edge(NodeId(0), NodeId(1)).is_err());
        // the reverse direction is a distinct directed edge
        g.add_edge(NodeId(1), NodeId(0)).unwrap();
        assert_eq!(g.undirected_neighbors(NodeId(0)).count(), 1);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete(5)), 0.5);
        assert_eq!(density(&TumorGraph::with_nodes(1, Origin::Seed)), 0.0);
        assert_eq!(density(&TumorGraph::new()), 0.0);
        let mut g = TumorGraph::with_nodes(3, Origin::Seed);
        g.add_edge(NodeId(0), NodeId(1)).unwrap();
        g.add_edge(NodeId(1), NodeId(2)).unwrap();
        assert!((density(&g) - 1.0 / 3.0).abs() < 1e-15);
    }
}
