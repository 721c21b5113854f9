//! Two-layer GCN link prediction: edge splits, full-batch training,
//! evaluation metrics, threshold calibration and candidate ranking.
//!
//! ```
//! use hypograph_core::linkpred::{evaluate, select_threshold};
//! let scores = [0.9, 0.8, 0.4, 0.2];
//! let labels = [true, false, true, false];
//! let r = evaluate(&scores, &labels, 0.5).unwrap();
//! assert_eq!(r.auroc, Some(0.75));
//! assert!(select_threshold(&scores, &labels).unwrap() <= 0.5);
//! ```

mod checkpoint;
pub mod gcn;
pub mod matrix;
mod metrics;
mod predict;
mod split;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::{KnowledgeGraph, NodeId};
pub use gcn::{normalize_adjacency, sigmoid, GcnParams};
use matrix::{Csr, Dense};
pub use metrics::{auprc, auroc, confusion, evaluate, select_threshold, Confusion, MetricsReport};
pub use predict::{parse_pairs, predict_candidates, write_predictions, Prediction, PredictionRow, PREDICTIONS_FILE};
pub use split::{partition_sizes, split_edges, EdgeSplit, Pair, MIN_SPLIT_EDGES};

#[derive(Debug, thiserror::Error)]
pub enum LinkPredError {
    #[error("graph has {found} edges, at least {needed} are needed to split")]
    TooFewEdges { found: usize, needed: usize },
    #[error("graph too dense: sampled only {found} of {wanted} negative pairs")]
    TooDense { wanted: usize, found: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("model was trained on a different node set ({0})")]
    NodeSet(String),
    #[error("line {line}: {message}")]
    Pairs { line: usize, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub out: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub negative_ratio: usize,
    pub clip_norm: f64,
    pub seed: u64,
    /// Row-parallel sparse products.
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            out: 32,
            learning_rate: 0.01,
            epochs: 1000,
            negative_ratio: 1,
            clip_norm: 5.0,
            seed: 42,
            parallel: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LinkPredError> {
        if self.hidden == 0 || self.out == 0 {
            return Err(LinkPredError::Config("layer widths must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(LinkPredError::Config("learning rate must be positive".into()));
        }
        if self.negative_ratio == 0 {
            return Err(LinkPredError::Config("negative ratio must be at least 1".into()));
        }
        if !(self.clip_norm > 0.0) {
            return Err(LinkPredError::Config("clip norm must be positive".into()));
        }
        Ok(())
    }
}

/// How node features were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Stored node features.
    Provided,
    /// Normalized adjacency row, scaled degree and a constant 1.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub params: GcnParams,
    pub config: TrainConfig,
    pub features: FeatureKind,
    /// Node order of the feature and embedding rows.
    pub nodes: Vec<NodeId>,
    /// Set by calibration after training.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Loss before each update.
    pub loss_curve: Vec<f64>,
    pub threshold: f64,
    pub val: MetricsReport,
    pub test: MetricsReport,
    pub val_at_half: MetricsReport,
    pub test_at_half: MetricsReport,
    pub split_sizes: [usize; 3],
}

pub(crate) fn node_index(nodes: &[NodeId]) -> HashMap<&NodeId, usize> {
    nodes.iter().enumerate().map(|(i, n)| (n, i)).collect()
}

fn index_pairs(idx: &HashMap<&NodeId, usize>, pairs: &[Pair]) -> Vec<(usize, usize)> {
    pairs.iter().map(|(a, b)| (idx[a], idx[b])).collect()
}

/// Feature matrix over `nodes`: stored features when the graph has any,
/// otherwise `[Â row, degree / max degree, 1]` computed from `adj`.
pub fn build_features(graph: &KnowledgeGraph, nodes: &[NodeId], adj: &Csr) -> (FeatureKind, Csr) {
    let n = nodes.len();
    if let Some(dim) = graph.feature_dim() {
        let mut t = Vec::new();
        let mut missing = 0;
        for (i, node) in nodes.iter().enumerate() {
            match graph.features(node) {
                Some(f) => t.extend(f.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (i, j, *v))),
                None => missing += 1,
            }
        }
        if missing > 0 {
            log::warn!("{missing} nodes have no stored features; using zeros");
        }
        return (FeatureKind::Provided, Csr::from_triplets(n, dim, t));
    }
    let degree: Vec<usize> = (0..n).map(|i| adj.row(i).filter(|(j, _)| *j != i).count()).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut t = Vec::with_capacity(adj.nnz() + 2 * n);
    for i in 0..n {
        t.extend(adj.row(i).map(|(j, v)| (i, j, v)));
        if degree[i] > 0 {
            t.push((i, n, degree[i] as f64 / max_deg));
        }
        t.push((i, n + 1, 1.0));
    }
    (FeatureKind::Structural, Csr::from_triplets(n, n + 2, t))
}

fn pair_indices(idx: &HashMap<&NodeId, usize>, graph_pairs: impl Iterator<Item = (NodeId, NodeId)>) -> Vec<(usize, usize)> {
    graph_pairs.map(|(a, b)| (idx[&a], idx[&b])).collect()
}

fn scores_for(z: &Dense, pos: &[(usize, usize)], neg: &[(usize, usize)]) -> (Vec<f64>, Vec<bool>) {
    let mut s = Vec::with_capacity(pos.len() + neg.len());
    let mut y = Vec::with_capacity(pos.len() + neg.len());
    for &(u, v) in pos {
        s.push(gcn::score_pair(z, u, v));
        y.push(true);
    }
    for &(u, v) in neg {
        s.push(gcn::score_pair(z, u, v));
        y.push(false);
    }
    (s, y)
}

/// Splits, trains by full-batch gradient descent on the mean cross-entropy
/// of train positives and sampled negatives (message passing over train
/// positives only, gradient norm clipped), picks the
/// F1-optimal threshold on validation and reports val and test metrics.
pub fn train(graph: &KnowledgeGraph, config: &TrainConfig) -> Result<(LinkModel, TrainReport), LinkPredError> {
    config.validate()?;
    let split = split_edges(graph, config.seed, config.negative_ratio)?;
    train_on_split(graph, &split, config)
}

pub fn train_on_split(
    graph: &KnowledgeGraph,
    split: &EdgeSplit,
    config: &TrainConfig,
) -> Result<(LinkModel, TrainReport), LinkPredError> {
    config.validate()?;
    let nodes: Vec<NodeId> = graph.nodes().cloned().collect();
    let idx = node_index(&nodes);
    let train_pos = index_pairs(&idx, &split.train);
    let adj = normalize_adjacency(nodes.len(), &train_pos);
    let (kind, x) = build_features(graph, &nodes, &adj);
    let mut params = GcnParams::init(x.cols, config.hidden, config.out, config.seed);

    let mut pairs = train_pos.clone();
    pairs.extend(index_pairs(&idx, &split.train_neg));
    let labels: Vec<f64> = (0..pairs.len()).map(|i| if i < train_pos.len() { 1.0 } else { 0.0 }).collect();

    let mut loss_curve = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let f = gcn::forward(&params, &x, &adj, config.parallel)?;
        let (loss, g_z) = gcn::bce_loss(&f.z, &pairs, &labels);
        if !loss.is_finite() {
            return Err(LinkPredError::NonFinite { epoch });
        }
        loss_curve.push(loss);
        let mut grad = gcn::backward(&params, &x, &adj, &f, &g_z);
        let norm = (grad.w1.norm_sq() + grad.w2.norm_sq()).sqrt();
        if norm > config.clip_norm {
            let s = config.clip_norm / norm;
            grad.w1.scale(s);
            grad.w2.scale(s);
        }
        params.w1.axpy(-config.learning_rate, &grad.w1);
        params.w2.axpy(-config.learning_rate, &grad.w2);
        if !params.is_finite() {
            return Err(LinkPredError::NonFinite { epoch });
        }
        if epoch % 100 == 0 || epoch == config.epochs {
            log::info!("Epoch: {epoch}, Loss: {loss:.4}");
        }
    }

    let z = gcn::forward(&params, &x, &adj, config.parallel)?.z;
    let (vs, vy) = scores_for(&z, &index_pairs(&idx, &split.val), &index_pairs(&idx, &split.val_neg));
    let (ts, ty) = scores_for(&z, &index_pairs(&idx, &split.test), &index_pairs(&idx, &split.test_neg));
    let threshold = select_threshold(&vs, &vy)?;
    let report = TrainReport {
        loss_curve,
        threshold,
        val: evaluate(&vs, &vy, threshold)?,
        test: evaluate(&ts, &ty, threshold)?,
        val_at_half: evaluate(&vs, &vy, 0.5)?,
        test_at_half: evaluate(&ts, &ty, 0.5)?,
        split_sizes: [split.train.len(), split.val.len(), split.test.len()],
    };
    log::info!("Optimal prediction threshold {threshold} which achieved f1 {}", report.val.f1);
    let model = LinkModel { params, config: config.clone(), features: kind, nodes, threshold: Some(threshold) };
    Ok((model, report))
}

/// A trained model bound to a graph for inference, with message passing
/// over every edge of that graph.
#[derive(Debug, Clone)]
pub struct Predictor<'a> {
    pub model: &'a LinkModel,
    pub graph: &'a KnowledgeGraph,
    pub adj: Csr,
    pub features: Csr,
    pub embeddings: Dense,
    index: HashMap<NodeId, usize>,
}

impl<'a> Predictor<'a> {
    pub fn new(model: &'a LinkModel, graph: &'a KnowledgeGraph) -> Result<Self, LinkPredError> {
        let nodes: Vec<NodeId> = graph.nodes().cloned().collect();
        if nodes != model.nodes {
            return Err(LinkPredError::NodeSet(format!(
                "model has {} nodes, graph has {}",
                model.nodes.len(),
                nodes.len()
            )));
        }
        let idx = node_index(&nodes);
        let pairs = pair_indices(&idx, graph.undirected_pairs().into_iter());
        let adj = normalize_adjacency(nodes.len(), &pairs);
        let (_, features) = build_features(graph, &nodes, &adj);
        let embeddings = gcn::forward(&model.params, &features, &adj, model.config.parallel)?.z;
        let index = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Ok(Self { model, graph, adj, features, embeddings, index })
    }

    pub fn index_of(&self, node: &NodeId) -> Result<usize, LinkPredError> {
        self.index.get(node).copied().ok_or_else(|| LinkPredError::UnknownNode(node.to_string()))
    }

    /// sigmoid(z_u · z_v)
    pub fn score_edge(&self, u: &NodeId, v: &NodeId) -> Result<f64, LinkPredError> {
        Ok(gcn::score_pair(&self.embeddings, self.index_of(u)?, self.index_of(v)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Provenance};

    fn id(i: usize) -> NodeId {
        NodeId::parse(&format!("N:{i:03}")).unwrap()
    }

    fn grid() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for r in 0..5 {
            for c in 0..5 {
                let i = r * 5 + c;
                if c < 4 {
                    g.add_edge(Edge::new(id(i), "r", id(i + 1), Provenance::KnowledgeBase)).unwrap();
                }
                if r < 4 {
                    g.add_edge(Edge::new(id(i), "r", id(i + 5), Provenance::KnowledgeBase)).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn structural_features_shape() {
        let g = grid();
        let nodes: Vec<NodeId> = g.nodes().cloned().collect();
        let idx = node_index(&nodes);
        let adj = normalize_adjacency(25, &pair_indices(&idx, g.undirected_pairs().into_iter()));
        let (kind, x) = build_features(&g, &nodes, &adj);
        assert_eq!(kind, FeatureKind::Structural);
        assert_eq!((x.rows, x.cols), (25, 27));
        assert_eq!(x.get(12, 25), 1.0);
        assert_eq!(x.get(0, 25), 0.5);
        assert_eq!(x.get(0, 26), 1.0);
        assert_eq!(x.get(0, 0), adj.get(0, 0));
    }

    #[test]
    fn training_descends_and_reports() {
        let g = grid();
        let cfg = TrainConfig { epochs: 60, ..Default::default() };
        let (model, report) = train(&g, &cfg).unwrap();
        assert_eq!(report.loss_curve.len(), 60);
        for w in report.loss_curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "{} then {}", w[0], w[1]);
        }
        assert_eq!(report.split_sizes, [34, 2, 4]);
        assert_eq!(model.threshold, Some(report.threshold));
        let again = train(&g, &cfg).unwrap();
        assert_eq!(again.0, model);
        let p = Predictor::new(&model, &g).unwrap();
        let s = p.score_edge(&id(0), &id(24)).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!(matches!(p.score_edge(&id(0), &id(99)), Err(LinkPredError::UnknownNode(_))));
    }

    #[test]
    fn parallel_mode_matches_serial() {
        let g = grid();
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        let par = TrainConfig { parallel: true, ..cfg.clone() };
        assert_eq!(train(&g, &cfg).unwrap().0.params, train(&g, &par).unwrap().0.params);
    }

    #[test]
    fn bad_config_rejected() {
        let g = grid();
        let cfg = TrainConfig { learning_rate: 0.0, ..Default::default() };
        assert!(matches!(train(&g, &cfg), Err(LinkPredError::Config(_))));
    }
}
