//! Node-link documents for graphs with per-node cell states.

use serde::{Deserialize, Serialize};

use crate::dynamics::CellState;
use crate::error::{from_json_str, Error, Result};
use crate::graph::{NodeId, Origin, TumorGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSnapshot {
    pub node_count: usize,
    pub nodes: Vec<SnapshotNode>,
    pub links: Vec<SnapshotLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotNode {
    pub id: usize,
    pub state: CellState,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotLink {
    pub src: usize,
    pub dst: usize,
}

pub fn snapshot(graph: &TumorGraph, states: &[CellState]) -> Result<GraphSnapshot> {
    if states.len() != graph.node_count() {
        return Err(Error::Integrity(format!(
            "state map covers {} node(s) but the graph has {}",
            states.len(),
            graph.node_count()
        )));
    }
    Ok(GraphSnapshot {
        node_count: graph.node_count(),
        nodes: graph
            .nodes()
            .map(|v| SnapshotNode {
                id: v.index(),
                state: states[v.index()],
                origin: graph.origin(v),
            })
            .collect(),
        links: graph
            .edges()
            .map(|(src, dst)| SnapshotLink {
                src: src.index(),
                dst: dst.index(),
            })
            .collect(),
    })
}

/// Rebuild the graph and state vector, checking every structural rule.
pub fn load_snapshot(doc: &GraphSnapshot) -> Result<(TumorGraph, Vec<CellState>)> {
    if doc.nodes.len() != doc.node_count {
        return Err(Error::Integrity(format!(
            "node_count is {} but {} node entries are present",
            doc.node_count,
            doc.nodes.len()
        )));
    }
    let mut graph = TumorGraph::new();
    let mut states = Vec::with_capacity(doc.node_count);
    for (position, node) in doc.nodes.iter().enumerate() {
        if node.id != position {
            return Err(Error::Integrity(format!(
                "node entry {position} has id {}; ids must be contiguous and ordered",
                node.id
            )));
        }
        graph.add_node(node.origin);
        states.push(node.state);
    }
    for link in &doc.links {
        graph.add_edge(NodeId(link.src), NodeId(link.dst))?;
    }
    Ok((graph, states))
}

impl GraphSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serialization is infallible")
    }

    /// Parse and validate a snapshot document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphSnapshot = from_json_str(text)?;
        load_snapshot(&doc)?;
        Ok(doc)
    }

    pub fn count(&self, state: CellState) -> usize {
        self.nodes.iter().filter(|n| n.state == state).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_snapshot() {
        let doc = snapshot(&TumorGraph::new(), &[]).unwrap();
        assert_eq!(doc.node_count, 0);
        assert!(doc.nodes.is_empty() && doc.links.is_empty());
        assert_eq!(GraphSnapshot::from_json(&doc.to_json()).unwrap(), doc);
    }

    #[test]
    fn two_node_document() {
        let mut g = TumorGraph::with_nodes(2, Origin::Seed);
        g.add_edge(NodeId(0), NodeId(1)).unwrap();
        let doc = snapshot(&g, &[CellState::Normal, CellState::Dead]).unwrap();
        let value: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(
            value,
            serde_json::json!({
                "node_count": 2,
                "nodes": [
                    {"id": 0, "state": "normal", "origin": "seed"},
                    {"id": 1, "state": "dead", "origin": "seed"}
                ],
                "links": [{"src": 0, "dst": 1}]
            })
        );
    }

    #[test]
    fn missing_state_is_integrity_error() {
        let g = TumorGraph::with_nodes(3, Origin::Seed);
        assert!(matches!(
            snapshot(&g, &[CellState::Normal]),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            r#"{"node_count": 2, "nodes": [{"id": 0, "state": "normal", "origin": "seed"}], "links": []}"#,
            r#"{"node_count": 1, "nodes": [{"id": 1, "state": "normal", "origin": "seed"}], "links": []}"#,
            r#"{"node_count": 1, "nodes": [{"id": 0, "state": "normal", "origin": "seed"}], "links": [{"src": 0, "dst": 0}]}"#,
            r#"{"node_count": 1, "nodes": [{"id": 0, "state": "normal", "origin": "seed"}], "links": [{"src": 0, "dst": 4}]}"#,
        ];
        for text in cases {
            assert!(
                matches!(GraphSnapshot::from_json(text), Err(Error::Integrity(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let text = "{\n  \"node_count\": 1,\n  \"nodes\": [{\"id\": 0, \"state\": \"sleepy\", \"origin\": \"seed\"}],\n  \"links\": []\n}";
        match GraphSnapshot::from_json(text) {
            Err(Error::Parse { path, line, .. }) => {
                assert_eq!(path, "nodes[0].state");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
