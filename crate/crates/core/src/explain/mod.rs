//! Edge-mask explanations of single predicted links.
//!
//! A sigmoid mask over the edges of the target's receptive field is fitted
//! to keep the predicted probability high while staying small and
//! near-binary. Masked edge weights enter the symmetric normalization, so a
//! low mask also changes the degrees seen by the rest of the field.

mod export;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::{k_hop_filter, merge_graphs, ordered_pair, GraphError, KnowledgeGraph, NodeId};
use crate::linkpred::gcn::{self, sigmoid, softplus};
use crate::linkpred::matrix::{Csr, Dense};
use crate::linkpred::{GcnParams, LinkPredError, Predictor};

pub use export::{dot_path, export_explanation, to_dot, to_tsv, tsv_path, ExportedFiles};

pub type EdgePair = (NodeId, NodeId);

#[derive(Debug, thiserror::Error)]
pub enum ExplainError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] LinkPredError),
    #[error("hops must be at least 1")]
    Hops,
    #[error("target endpoints must differ")]
    SelfLoop,
    #[error("objective became non-finite at iteration {0}")]
    NonFinite(usize),
    #[error("mask has {found} entries, expected {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    /// Weight of the mask-size penalty.
    pub lambda_size: f64,
    /// Weight of the mask-entropy penalty.
    pub lambda_entropy: f64,
    pub hops: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self { iterations: 200, learning_rate: 0.05, lambda_size: 0.005, lambda_entropy: 1.0, hops: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub target: EdgePair,
    /// Unmasked model probability of the target link.
    pub predicted_probability: f64,
    /// Probability under the fitted mask.
    pub masked_probability: f64,
    /// Final mask value of every non-target edge in the computation subgraph.
    #[serde(with = "pair_map")]
    pub edge_scores: BTreeMap<EdgePair, f64>,
    pub top_k: Vec<(EdgePair, f64)>,
    /// Objective before each update.
    pub objective: Vec<f64>,
    #[serde(skip)]
    pub computation_subgraph: KnowledgeGraph,
}

mod pair_map {
    use super::EdgePair;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<EdgePair, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|((a, b), v)| (a, b, *v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<EdgePair, f64>, D::Error> {
        let v: Vec<(crate::graph::NodeId, crate::graph::NodeId, f64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(a, b, s)| ((a, b), s)).collect())
    }
}

impl Explanation {
    /// All scored edges, highest first, ties in edge order.
    pub fn ranked_edges(&self) -> Vec<(EdgePair, f64)> {
        rank(&self.edge_scores, usize::MAX)
    }

    pub fn top(&self, k: usize) -> Vec<(EdgePair, f64)> {
        rank(&self.edge_scores, k)
    }
}

fn rank(scores: &BTreeMap<EdgePair, f64>, k: usize) -> Vec<(EdgePair, f64)> {
    let mut v: Vec<(EdgePair, f64)> = scores.iter().map(|(e, s)| (e.clone(), *s)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

/// Union of the `hops`-neighbourhoods of each endpoint.
pub fn computation_subgraph(graph: &KnowledgeGraph, endpoints: &[NodeId], hops: usize) -> Result<KnowledgeGraph, ExplainError> {
    if hops == 0 {
        return Err(ExplainError::Hops);
    }
    let mut out = KnowledgeGraph::new();
    for e in endpoints {
        out = merge_graphs(&out, &k_hop_filter(graph, std::slice::from_ref(e), hops)?)?;
    }
    Ok(out)
}

/// The GCN restricted to a target's computation subgraph with a free
/// weight on each subgraph edge. Neighbours outside the subgraph still
/// count toward node degrees, so an all-ones mask reproduces the full
/// model's score exactly.
pub struct MaskedModel<'a> {
    params: &'a GcnParams,
    nodes: Vec<NodeId>,
    edges: Vec<(usize, usize)>,
    pairs: Vec<EdgePair>,
    edge_of: HashMap<(usize, usize), usize>,
    external_degree: Vec<f64>,
    features: Csr,
    head: usize,
    tail: usize,
    target_edge: Option<usize>,
    subgraph: KnowledgeGraph,
}

impl<'a> MaskedModel<'a> {
    pub fn new(predictor: &Predictor<'a>, target: &EdgePair, hops: usize) -> Result<Self, ExplainError> {
        let (h, t) = target;
        if h == t {
            return Err(ExplainError::SelfLoop);
        }
        let graph = predictor.graph;
        let subgraph = computation_subgraph(graph, &[h.clone(), t.clone()], hops)?;
        let nodes: Vec<NodeId> = subgraph.nodes().cloned().collect();
        let local: HashMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let pairs: Vec<EdgePair> = subgraph.undirected_pairs().into_iter().collect();
        let edges: Vec<(usize, usize)> = pairs.iter().map(|(a, b)| (local[a], local[b])).collect();
        let mut edge_of = HashMap::new();
        let mut sub_degree = vec![0usize; nodes.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            edge_of.insert((a, b), e);
            edge_of.insert((b, a), e);
            sub_degree[a] += 1;
            sub_degree[b] += 1;
        }
        let mut external_degree = Vec::with_capacity(nodes.len());
        let mut rows = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            let g = predictor.index_of(n)?;
            let full = predictor.adj.row(g).filter(|(j, _)| *j != g).count();
            external_degree.push((full - sub_degree[i]) as f64);
            rows.extend(predictor.features.row(g).map(|(j, v)| (i, j, v)));
        }
        let features = Csr::from_triplets(nodes.len(), predictor.features.cols, rows);
        let (head, tail) = (local[h], local[t]);
        let target_edge = edge_of.get(&(head, tail)).copied();
        Ok(Self {
            params: &predictor.model.params,
            nodes,
            edges,
            pairs,
            edge_of,
            external_degree,
            features,
            head,
            tail,
            target_edge,
            subgraph,
        })
    }

    /// Subgraph edges as ordered node pairs; mask vectors follow this order.
    pub fn edges(&self) -> &[EdgePair] {
        &self.pairs
    }

    pub fn target_edge(&self) -> Option<usize> {
        self.target_edge
    }

    pub fn subgraph(&self) -> &KnowledgeGraph {
        &self.subgraph
    }

    fn adjacency(&self, mask: &[f64]) -> (Csr, Vec<f64>) {
        let n = self.nodes.len();
        let mut deg: Vec<f64> = self.external_degree.iter().map(|e| 1.0 + e).collect();
        for (&(a, b), m) in self.edges.iter().zip(mask) {
            deg[a] += m;
            deg[b] += m;
        }
        let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0 / deg[i])).collect();
        for (&(a, b), m) in self.edges.iter().zip(mask) {
            let w = m / (deg[a] * deg[b]).sqrt();
            t.push((a, b, w));
            t.push((b, a, w));
        }
        (Csr::from_triplets(n, n, t), deg)
    }

    fn check(&self, mask: &[f64]) -> Result<(), ExplainError> {
        if mask.len() != self.edges.len() {
            return Err(ExplainError::MaskLength { expected: self.edges.len(), found: mask.len() });
        }
        Ok(())
    }

    /// Target logit z_head · z_tail under an edge mask.
    pub fn logit(&self, mask: &[f64]) -> Result<f64, ExplainError> {
        self.check(mask)?;
        let (adj, _) = self.adjacency(mask);
        let z = gcn::forward(self.params, &self.features, &adj, false)?.z;
        Ok(crate::linkpred::matrix::dot(z.row(self.head), z.row(self.tail)))
    }

    pub fn probability(&self, mask: &[f64]) -> Result<f64, ExplainError> {
        Ok(sigmoid(self.logit(mask)?))
    }

    /// −log p(target) under `mask` and its gradient with respect to each
    /// mask entry.
    pub fn nll_gradient(&self, mask: &[f64]) -> Result<(f64, Vec<f64>), ExplainError> {
        self.check(mask)?;
        let (adj, deg) = self.adjacency(mask);
        let f = gcn::forward(self.params, &self.features, &adj, false)?;
        let (h, t) = (self.head, self.tail);
        let s = crate::linkpred::matrix::dot(f.z.row(h), f.z.row(t));
        let ds = sigmoid(s) - 1.0;
        let mut g_z = Dense::zeros(f.z.rows, f.z.cols);
        for (c, v) in f.z.row(t).iter().enumerate() {
            g_z.row_mut(h)[c] += ds * v;
        }
        for (c, v) in f.z.row(h).iter().enumerate() {
            g_z.row_mut(t)[c] += ds * v;
        }
        let g_adj = gcn::adjacency_gradient(self.params, &adj, &f, &g_z);

        let mut g_deg = vec![0.0; deg.len()];
        let mut g_mask = vec![0.0; self.edges.len()];
        let mut p = 0;
        for i in 0..adj.rows {
            for (j, v) in adj.row(i) {
                let g = g_adj[p];
                p += 1;
                g_deg[i] -= 0.5 * g * v / deg[i];
                g_deg[j] -= 0.5 * g * v / deg[j];
                if i != j {
                    g_mask[self.edge_of[&(i, j)]] += g / (deg[i] * deg[j]).sqrt();
                }
            }
        }
        for (g, &(a, b)) in g_mask.iter_mut().zip(&self.edges) {
            *g += g_deg[a] + g_deg[b];
        }
        Ok((softplus(-s), g_mask))
    }
}

fn entropy(m: f64) -> f64 {
    let mut h = 0.0;
    if m > 0.0 {
        h -= m * m.ln();
    }
    if m < 1.0 {
        h -= (1.0 - m) * (1.0 - m).ln();
    }
    h
}

/// Mask for free parameters `theta`, with the target edge pinned at 1.
fn mask_of(model: &MaskedModel, theta: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = theta.iter().map(|t| sigmoid(*t)).collect();
    if let Some(e) = model.target_edge {
        m[e] = 1.0;
    }
    m
}

/// Objective value and gradient with respect to the free parameters.
pub fn objective(model: &MaskedModel, theta: &[f64], config: &ExplainConfig) -> Result<(f64, Vec<f64>), ExplainError> {
    let m = mask_of(model, theta);
    let (nll, g_m) = model.nll_gradient(&m)?;
    let mut value = nll;
    let mut grad = vec![0.0; theta.len()];
    for e in 0..theta.len() {
        if Some(e) == model.target_edge {
            continue;
        }
        let me = m[e];
        value += config.lambda_size * me + config.lambda_entropy * entropy(me);
        // d entropy / d theta = ln((1 - m) / m) · m(1 - m) = -theta · m(1 - m)
        grad[e] = (g_m[e] + config.lambda_size - config.lambda_entropy * theta[e]) * me * (1.0 - me);
    }
    Ok((value, grad))
}

/// Fits an edge mask for `target` by gradient descent from mask 0.5 and
/// returns the `k` most important non-target edges.
pub fn explain_edge(
    predictor: &Predictor,
    target: &EdgePair,
    k: usize,
    config: &ExplainConfig,
) -> Result<Explanation, ExplainError> {
    let model = MaskedModel::new(predictor, target, config.hops)?;
    let mut theta = vec![0.0; model.edges.len()];
    let mut curve = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        let (value, grad) = objective(&model, &theta, config)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(ExplainError::NonFinite(it));
        }
        curve.push(value);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.learning_rate * g;
        }
    }
    let mask = mask_of(&model, &theta);
    let masked_probability = model.probability(&mask)?;
    if !masked_probability.is_finite() {
        return Err(ExplainError::NonFinite(config.iterations));
    }
    let edge_scores: BTreeMap<EdgePair, f64> = model
        .pairs
        .iter()
        .zip(&mask)
        .enumerate()
        .filter(|(e, _)| Some(*e) != model.target_edge)
        .map(|(_, (p, m))| (p.clone(), *m))
        .collect();
    let top_k = rank(&edge_scores, k);
    Ok(Explanation {
        target: target.clone(),
        predicted_probability: predictor.score_edge(&target.0, &target.1)?,
        masked_probability,
        edge_scores,
        top_k,
        objective: curve,
        computation_subgraph: model.subgraph,
    })
}

/// Canonical key for an undirected edge.
pub fn edge_key(a: &NodeId, b: &NodeId) -> EdgePair {
    ordered_pair(a, b)
}
