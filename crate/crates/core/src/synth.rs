//! Seeded synthetic graphs with planted structure, for benchmarks and
//! explainer checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, KnowledgeGraph, NodeId, Provenance};

pub fn node(prefix: &str, i: usize) -> NodeId {
    NodeId::parse(&format!("{prefix}:{i:03}")).expect("valid synthetic id")
}

fn link(g: &mut KnowledgeGraph, a: &NodeId, b: &NodeId) {
    g.add_edge(Edge::new(a.clone(), "linked_to", b.clone(), Provenance::KnowledgeBase))
        .expect("synthetic edge");
}

/// Two communities of `size` nodes (`A:*` and `B:*`); each intra pair is an
/// edge with probability `p_in`, each cross pair with `p_out`.
pub fn planted_communities(size: usize, p_in: f64, p_out: f64, seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<NodeId> = (0..size).map(|i| node("A", i)).chain((0..size).map(|i| node("B", i))).collect();
    let mut g = KnowledgeGraph::new();
    for id in &ids {
        g.add_node(id.clone());
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let same = (i < size) == (j < size);
            if rng.random_bool(if same { p_in } else { p_out }) {
                link(&mut g, &ids[i], &ids[j]);
            }
        }
    }
    g
}

/// The block benchmark graph: two 30-node communities with dense insides
/// and sparse cross edges.
pub fn block_benchmark(seed: u64) -> KnowledgeGraph {
    planted_communities(30, 0.9, 0.02, seed)
}

/// Whether two benchmark nodes share a community.
pub fn same_block(a: &NodeId, b: &NodeId) -> bool {
    a.namespace() == b.namespace()
}

/// A random noise graph with a target pair whose only shared structure is
/// one planted two-hop path `head - bridge - tail`.
#[derive(Debug, Clone)]
pub struct PlantedDriver {
    pub graph: KnowledgeGraph,
    pub target: (NodeId, NodeId),
    pub path: [(NodeId, NodeId); 2],
}

/// `noise` background nodes with edge probability `p`; head and tail each
/// get `fanout` distinct random background neighbours, and the bridge one.
pub fn planted_driver_with(noise: usize, p: f64, fanout: usize, seed: u64) -> PlantedDriver {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg: Vec<NodeId> = (0..noise).map(|i| node("N", i)).collect();
    let mut g = KnowledgeGraph::new();
    for id in &bg {
        g.add_node(id.clone());
    }
    for i in 0..noise {
        for j in i + 1..noise {
            if rng.random_bool(p) {
                link(&mut g, &bg[i], &bg[j]);
            }
        }
    }
    let head = NodeId::parse("T:head").expect("valid id");
    let tail = NodeId::parse("T:tail").expect("valid id");
    let bridge = NodeId::parse("T:bridge").expect("valid id");
    let mut pool: Vec<usize> = (0..noise).collect();
    for _ in 0..2 * fanout + 1 {
        let k = rng.random_range(0..pool.len());
        pool.swap_remove(k);
    }
    let picked: Vec<usize> = (0..noise).filter(|i| !pool.contains(i)).collect();
    let mut order = picked.clone();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for &i in &order[..fanout] {
        link(&mut g, &head, &bg[i]);
    }
    for &i in &order[fanout..2 * fanout] {
        link(&mut g, &tail, &bg[i]);
    }
    link(&mut g, &bridge, &bg[order[2 * fanout]]);
    link(&mut g, &head, &bridge);
    link(&mut g, &bridge, &tail);
    PlantedDriver {
        graph: g,
        target: (head.clone(), tail.clone()),
        path: [crate::graph::ordered_pair(&head, &bridge), crate::graph::ordered_pair(&bridge, &tail)],
    }
}

pub fn planted_driver(seed: u64) -> PlantedDriver {
    planted_driver_with(40, 0.08, 3, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_graph_is_seeded() {
        let a = block_benchmark(1);
        assert_eq!(a.node_count(), 60);
        assert_eq!(a.fingerprint(), block_benchmark(1).fingerprint());
        assert_ne!(a.fingerprint(), block_benchmark(2).fingerprint());
        let cross = a.edge_keys().filter(|k| !same_block(&k.head, &k.tail)).count();
        assert!(cross * 5 < a.edge_count());
    }
}
