//! In-memory knowledge graph: namespaced nodes, typed directed edges with
//! provenance, optional node features and descriptions.
//!
//! Edges are stored directed, keyed by `(head, relation, tail, provenance)`.
//! Traversal, degree and statistics use the undirected view. Self-loops are
//! rejected on insert.

mod io;
mod node;
mod ops;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use io::{
    load_edge_list, load_node_features, load_node_text, write_edge_list, AuxLoadReport,
    LoadReport,
};
pub use node::NodeId;
pub use ops::{degree, graph_summary, k_hop_filter, merge_graphs, GraphStats, DEFAULT_HOPS};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid node id {0:?}: expected namespace:local_id")]
    InvalidNodeId(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("every line of {path} is malformed ({malformed} lines)")]
    AllLinesMalformed { path: PathBuf, malformed: usize },
    #[error("feature vector for {node} has dimension {found}, graph uses {expected}")]
    FeatureDimension {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    #[error("cannot merge graphs with feature dimensions {base} and {overlay}")]
    MergeFeatureDimension { base: usize, overlay: usize },
    #[error("unknown seed nodes: {}", join_ids(.0))]
    UnknownSeeds(Vec<NodeId>),
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("edge relation must be non-empty")]
    EmptyRelation,
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(NodeId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Where an edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    KnowledgeBase,
    TextMining,
    Predicted,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::KnowledgeBase => "knowledge_base",
            Provenance::TextMining => "text_mining",
            Provenance::Predicted => "predicted",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of a stored edge. At most one edge exists per key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeKey {
    pub head: NodeId,
    pub relation: Arc<str>,
    pub tail: NodeId,
    pub provenance: Provenance,
}

impl EdgeKey {
    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other(&self, node: &NodeId) -> Option<&NodeId> {
        if &self.head == node {
            Some(&self.tail)
        } else if &self.tail == node {
            Some(&self.head)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub head: NodeId,
    pub relation: Arc<str>,
    pub tail: NodeId,
    pub provenance: Provenance,
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(head: NodeId, relation: &str, tail: NodeId, provenance: Provenance) -> Self {
        Self {
            head,
            relation: Arc::from(relation),
            tail,
            provenance,
            weight: None,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            head: self.head.clone(),
            relation: self.relation.clone(),
            tail: self.tail.clone(),
            provenance: self.provenance,
        }
    }
}

/// Outcome of inserting one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeInsert {
    Added,
    Duplicate,
    /// Duplicate key carrying a different weight; the stored weight is kept.
    WeightConflict,
    SelfLoopDropped,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<EdgeKey, Option<f64>>,
    incident: HashMap<NodeId, BTreeSet<EdgeKey>>,
    by_relation: HashMap<Arc<str>, BTreeSet<EdgeKey>>,
    features: BTreeMap<NodeId, Vec<f64>>,
    feature_dim: Option<usize>,
    node_text: BTreeMap<NodeId, String>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.features == other.features
            && self.feature_dim == other.feature_dim
            && self.node_text == other.node_text
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the node was not present before.
    pub fn add_node(&mut self, id: NodeId) -> bool {
        self.nodes.insert(id)
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<EdgeInsert, GraphError> {
        if edge.relation.is_empty() {
            return Err(GraphError::EmptyRelation);
        }
        if edge.head == edge.tail {
            self.add_node(edge.head);
            return Ok(EdgeInsert::SelfLoopDropped);
        }
        let key = edge.key();
        if let Some(existing) = self.edges.get(&key) {
            let same = match (existing, edge.weight) {
                (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
                (None, None) => true,
                _ => false,
            };
            return Ok(if same {
                EdgeInsert::Duplicate
            } else {
                EdgeInsert::WeightConflict
            });
        }
        self.nodes.insert(edge.head.clone());
        self.nodes.insert(edge.tail.clone());
        self.incident
            .entry(edge.head.clone())
            .or_default()
            .insert(key.clone());
        self.incident
            .entry(edge.tail.clone())
            .or_default()
            .insert(key.clone());
        self.by_relation
            .entry(key.relation.clone())
            .or_default()
            .insert(key.clone());
        self.edges.insert(key, edge.weight);
        Ok(EdgeInsert::Added)
    }

    pub fn set_features(&mut self, id: &NodeId, values: Vec<f64>) -> Result<(), GraphError> {
        if !self.nodes.contains(id) {
            return Err(GraphError::UnknownNode(id.clone()));
        }
        match self.feature_dim {
            Some(dim) if dim != values.len() => {
                return Err(GraphError::FeatureDimension {
                    node: id.clone(),
                    expected: dim,
                    found: values.len(),
                })
            }
            _ => self.feature_dim = Some(values.len()),
        }
        self.features.insert(id.clone(), values);
        Ok(())
    }

    pub fn set_node_text(&mut self, id: &NodeId, text: impl Into<String>) -> Result<(), GraphError> {
        if !self.nodes.contains(id) {
            return Err(GraphError::UnknownNode(id.clone()));
        }
        self.node_text.insert(id.clone(), text.into());
        Ok(())
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of stored (directed, typed) edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes.iter()
    }

    /// Edges in key order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(k, w)| Edge {
            head: k.head.clone(),
            relation: k.relation.clone(),
            tail: k.tail.clone(),
            provenance: k.provenance,
            weight: *w,
        })
    }

    pub fn edge_keys(&self) -> impl Iterator<Item = &EdgeKey> + '_ {
        self.edges.keys()
    }

    pub fn edge_weight(&self, key: &EdgeKey) -> Option<f64> {
        self.edges.get(key).copied().flatten()
    }

    pub fn contains_edge(&self, key: &EdgeKey) -> bool {
        self.edges.contains_key(key)
    }

    /// Edges touching `node`, in key order.
    pub fn incident_edges(&self, node: &NodeId) -> std::collections::btree_set::Iter<'_, EdgeKey> {
        static EMPTY: BTreeSet<EdgeKey> = BTreeSet::new();
        self.incident.get(node).unwrap_or(&EMPTY).iter()
    }

    /// Number of edges touching `node`; zero for unknown nodes.
    pub fn degree_of(&self, node: &NodeId) -> usize {
        self.incident.get(node).map_or(0, BTreeSet::len)
    }

    pub fn edges_with_relation(&self, relation: &str) -> impl Iterator<Item = &EdgeKey> + '_ {
        self.by_relation.get(relation).into_iter().flatten()
    }

    /// Nodes whose namespace equals `namespace`, in canonical order.
    pub fn nodes_in_namespace<'a>(&'a self, namespace: &'a str) -> impl Iterator<Item = &'a NodeId> + 'a {
        let lower = NodeId::namespace_lower_bound(namespace);
        self.nodes
            .range(lower..)
            .take_while(move |id| id.namespace() == namespace)
    }

    /// Distinct namespaces present in the graph.
    pub fn namespaces(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(NodeId::namespace).collect()
    }

    /// Distinct relation names present in the graph.
    pub fn relations(&self) -> BTreeSet<&str> {
        self.by_relation
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, _)| k.as_ref())
            .collect()
    }

    /// Undirected simple-view neighbours of `node`.
    pub fn neighbors(&self, node: &NodeId) -> BTreeSet<&NodeId> {
        self.incident_edges(node)
            .filter_map(|k| k.other(node))
            .collect()
    }

    /// Whether any edge, of any relation or direction, joins `a` and `b`.
    pub fn connected(&self, a: &NodeId, b: &NodeId) -> bool {
        let (small, other) = if self.degree_of(a) <= self.degree_of(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.incident_edges(small)
            .any(|k| k.other(small) == Some(other))
    }

    /// Unordered node pairs joined by at least one edge, each as `(min, max)`.
    pub fn undirected_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges
            .keys()
            .map(|k| ordered_pair(&k.head, &k.tail))
            .collect()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.feature_dim
    }

    pub fn features(&self, id: &NodeId) -> Option<&[f64]> {
        self.features.get(id).map(Vec::as_slice)
    }

    pub fn has_features(&self) -> bool {
        !self.features.is_empty()
    }

    pub fn node_text(&self, id: &NodeId) -> Option<&str> {
        self.node_text.get(id).map(String::as_str)
    }

    pub fn node_texts(&self) -> impl Iterator<Item = (&NodeId, &str)> + '_ {
        self.node_text.iter().map(|(k, v)| (k, v.as_str()))
    }

    /// SHA-256 over the canonical content (nodes, edges, features, text).
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for n in &self.nodes {
            h.update(n.as_str().as_bytes());
            h.update([0u8]);
        }
        h.update([1u8]);
        for (k, w) in &self.edges {
            h.update(k.head.as_str().as_bytes());
            h.update([0u8]);
            h.update(k.relation.as_bytes());
            h.update([0u8]);
            h.update(k.tail.as_str().as_bytes());
            h.update([k.provenance as u8]);
            match w {
                Some(w) => h.update(w.to_le_bytes()),
                None => h.update([0xffu8]),
            }
        }
        h.update([2u8]);
        for (n, f) in &self.features {
            h.update(n.as_str().as_bytes());
            for v in f {
                h.update(v.to_le_bytes());
            }
        }
        h.update([3u8]);
        for (n, t) in &self.node_text {
            h.update(n.as_str().as_bytes());
            h.update([0u8]);
            h.update(t.as_bytes());
        }
        h.finalize().into()
    }

    /// Checks that every edge endpoint is a node and indexes agree.
    pub fn check_integrity(&self) -> bool {
        self.edges
            .keys()
            .all(|k| self.nodes.contains(&k.head) && self.nodes.contains(&k.tail) && k.head != k.tail)
            && self.features.keys().all(|n| self.nodes.contains(n))
            && self.node_text.keys().all(|n| self.nodes.contains(n))
            && self.incident.values().map(BTreeSet::len).sum::<usize>() == 2 * self.edges.len()
    }

    /// Subgraph induced by `keep`, carrying features and text.
    pub(crate) fn induced(&self, keep: &BTreeSet<NodeId>) -> KnowledgeGraph {
        let mut out = KnowledgeGraph::new();
        for n in keep {
            out.add_node(n.clone());
        }
        for edge in self.edges() {
            if keep.contains(&edge.head) && keep.contains(&edge.tail) {
                out.add_edge(edge).expect("edges from a valid graph");
            }
        }
        out.feature_dim = self.feature_dim;
        for n in keep {
            if let Some(f) = self.features.get(n) {
                out.features.insert(n.clone(), f.clone());
            }
            if let Some(t) = self.node_text.get(n) {
                out.node_text.insert(n.clone(), t.clone());
            }
        }
        out
    }
}

/// `(min, max)` ordering of two node ids.
pub fn ordered_pair(a: &NodeId, b: &NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::parse(s).unwrap()
    }

    #[test]
    fn add_edge_dedups_and_drops_self_loops() {
        let mut g = KnowledgeGraph::new();
        let e = Edge::new(id("A:1"), "r", id("B:2"), Provenance::KnowledgeBase);
        assert_eq!(g.add_edge(e.clone()).unwrap(), EdgeInsert::Added);
        assert_eq!(g.add_edge(e.clone()).unwrap(), EdgeInsert::Duplicate);
        assert_eq!(
            g.add_edge(e.clone().with_weight(0.3)).unwrap(),
            EdgeInsert::WeightConflict
        );
        let looped = Edge::new(id("C:3"), "r", id("C:3"), Provenance::KnowledgeBase);
        assert_eq!(g.add_edge(looped).unwrap(), EdgeInsert::SelfLoopDropped);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert!(g.check_integrity());
    }

    #[test]
    fn same_triple_with_other_provenance_is_a_separate_edge() {
        let mut g = KnowledgeGraph::new();
        let e = Edge::new(id("A:1"), "r", id("B:2"), Provenance::KnowledgeBase);
        g.add_edge(e.clone()).unwrap();
        let mut tm = e;
        tm.provenance = Provenance::TextMining;
        assert_eq!(g.add_edge(tm).unwrap(), EdgeInsert::Added);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.undirected_pairs().len(), 1);
    }

    #[test]
    fn namespace_index_is_exact() {
        let mut g = KnowledgeGraph::new();
        for n in ["A:1", "A:2", "A1:x", "AB:1", "B:1"] {
            g.add_node(id(n));
        }
        let a: Vec<_> = g.nodes_in_namespace("A").map(|n| n.as_str()).collect();
        assert_eq!(a, vec!["A:1", "A:2"]);
        assert_eq!(g.nodes_in_namespace("Z").count(), 0);
    }

    #[test]
    fn feature_dimension_is_enforced() {
        let mut g = KnowledgeGraph::new();
        g.add_node(id("A:1"));
        g.add_node(id("A:2"));
        g.set_features(&id("A:1"), vec![1.0, 2.0]).unwrap();
        let err = g.set_features(&id("A:2"), vec![1.0]).unwrap_err();
        assert!(matches!(err, GraphError::FeatureDimension { expected: 2, found: 1, .. }));
        assert!(g.set_features(&id("Z:9"), vec![0.0, 0.0]).is_err());
    }
}
