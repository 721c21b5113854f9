use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LinkPredError;
use crate::graph::{ordered_pair, KnowledgeGraph, NodeId};

pub const MIN_SPLIT_EDGES: usize = 20;
const RATIOS: [usize; 3] = [85, 5, 10];

pub type Pair = (NodeId, NodeId);

/// Positive and negative node pairs per partition. Pairs are undirected and
/// stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub seed: u64,
    pub train: Vec<Pair>,
    pub val: Vec<Pair>,
    pub test: Vec<Pair>,
    pub train_neg: Vec<Pair>,
    pub val_neg: Vec<Pair>,
    pub test_neg: Vec<Pair>,
}

/// Train/val/test sizes for `n` positives by largest-remainder rounding of
/// 85:5:10; equal remainders favour train, then val.
pub fn partition_sizes(n: usize) -> [usize; 3] {
    let mut sizes = RATIOS.map(|r| n * r / 100);
    let mut order: Vec<(usize, usize)> = RATIOS.iter().enumerate().map(|(i, r)| (n * r % 100, i)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = n - sizes.iter().sum::<usize>();
    for &(_, i) in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

/// Splits the graph's undirected simple edges and samples `negative_ratio`
/// non-edges per positive in each partition.
pub fn split_edges(graph: &KnowledgeGraph, seed: u64, negative_ratio: usize) -> Result<EdgeSplit, LinkPredError> {
    let existing = graph.undirected_pairs();
    if existing.len() < MIN_SPLIT_EDGES {
        return Err(LinkPredError::TooFewEdges { found: existing.len(), needed: MIN_SPLIT_EDGES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positives: Vec<Pair> = existing.iter().cloned().collect();
    positives.shuffle(&mut rng);
    let [n_train, n_val, _] = partition_sizes(positives.len());
    let test = positives.split_off(n_train + n_val);
    let val = positives.split_off(n_train);
    let train = positives;

    let nodes: Vec<&NodeId> = graph.nodes().collect();
    let mut taken: BTreeSet<Pair> = BTreeSet::new();
    let mut sample = |count: usize| -> Result<Vec<Pair>, LinkPredError> {
        let budget = 100 * count + 1000;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > budget {
                return Err(LinkPredError::TooDense { wanted: count, found: out.len() });
            }
            let a = nodes[rng.random_range(0..nodes.len())];
            let b = nodes[rng.random_range(0..nodes.len())];
            if a == b {
                continue;
            }
            let p = ordered_pair(a, b);
            if existing.contains(&p) || taken.contains(&p) {
                continue;
            }
            taken.insert(p.clone());
            out.push(p);
        }
        Ok(out)
    };
    let train_neg = sample(train.len() * negative_ratio)?;
    let val_neg = sample(val.len() * negative_ratio)?;
    let test_neg = sample(test.len() * negative_ratio)?;
    Ok(EdgeSplit { seed, train, val, test, train_neg, val_neg, test_neg })
}
