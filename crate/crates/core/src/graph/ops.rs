use std::collections::{BTreeSet, VecDeque};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{EdgeInsert, GraphError, KnowledgeGraph, NodeId};

/// Hop radius used by `kg filter` when `--k` is not given.
pub const DEFAULT_HOPS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    /// Distinct unordered node pairs joined by at least one edge.
    pub edge_count: usize,
    pub average_degree: f64,
    pub feature_dim: usize,
    pub has_isolated_nodes: bool,
    pub has_self_loops: bool,
}

/// Union of two graphs. Edges keep their provenance; for an edge key present
/// in both, the base weight wins. Features and descriptions also prefer base.
pub fn merge_graphs(base: &KnowledgeGraph, overlay: &KnowledgeGraph) -> Result<KnowledgeGraph, GraphError> {
    if let (Some(b), Some(o)) = (base.feature_dim, overlay.feature_dim) {
        if b != o {
            return Err(GraphError::MergeFeatureDimension { base: b, overlay: o });
        }
    }
    let mut out = base.clone();
    for n in overlay.nodes() {
        out.add_node(n.clone());
    }
    let mut conflicts = 0usize;
    for edge in overlay.edges() {
        if out.add_edge(edge)? == EdgeInsert::WeightConflict {
            conflicts += 1;
        }
    }
    if conflicts > 0 {
        warn!("merge: {conflicts} edges carried conflicting weights, kept the base weight");
    }
    for (n, f) in &overlay.features {
        if !out.features.contains_key(n) {
            out.set_features(n, f.clone())?;
        }
    }
    for (n, t) in &overlay.node_text {
        out.node_text.entry(n.clone()).or_insert_with(|| t.clone());
    }
    Ok(out)
}

/// Subgraph induced by every node within undirected distance `k` of a seed.
pub fn k_hop_filter(graph: &KnowledgeGraph, seeds: &[NodeId], k: usize) -> Result<KnowledgeGraph, GraphError> {
    let unknown: BTreeSet<NodeId> = seeds
        .iter()
        .filter(|s| !graph.contains_node(s))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(GraphError::UnknownSeeds(unknown.into_iter().collect()));
    }
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut queue: VecDeque<(NodeId, usize)> = VecDeque::new();
    for s in seeds {
        if seen.insert(s.clone()) {
            queue.push_back((s.clone(), 0));
        }
    }
    while let Some((node, dist)) = queue.pop_front() {
        if dist == k {
            continue;
        }
        for next in graph.neighbors(&node) {
            if !seen.contains(next) {
                seen.insert(next.clone());
                queue.push_back((next.clone(), dist + 1));
            }
        }
    }
    Ok(graph.induced(&seen))
}

pub fn graph_summary(graph: &KnowledgeGraph) -> Result<GraphStats, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let node_count = graph.node_count();
    let edge_count = graph.undirected_pairs().len();
    Ok(GraphStats {
        node_count,
        edge_count,
        average_degree: 2.0 * edge_count as f64 / node_count as f64,
        feature_dim: graph.feature_dim().unwrap_or(0),
        has_isolated_nodes: graph.nodes().any(|n| graph.degree_of(n) == 0),
        has_self_loops: graph.edge_keys().any(|k| k.head == k.tail),
    })
}

/// Incident edge count in the undirected multigraph view.
pub fn degree(graph: &KnowledgeGraph, node: &NodeId) -> Result<usize, GraphError> {
    if !graph.contains_node(node) {
        return Err(GraphError::UnknownNode(node.clone()));
    }
    Ok(graph.degree_of(node))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Provenance};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn id(s: &str) -> NodeId {
        NodeId::parse(s).unwrap()
    }

    fn graph_from(edges: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (a, b) in edges {
            g.add_edge(Edge::new(id(a), "r", id(b), Provenance::KnowledgeBase))
                .unwrap();
        }
        g
    }

    fn path_abcd() -> KnowledgeGraph {
        graph_from(&[("N:A", "N:B"), ("N:B", "N:C"), ("N:C", "N:D")])
    }

    fn names(g: &KnowledgeGraph) -> Vec<&str> {
        g.nodes().map(NodeId::as_str).collect()
    }

    #[test]
    fn k_zero_keeps_only_seeds() {
        let sub = k_hop_filter(&path_abcd(), &[id("N:A")], 0).unwrap();
        assert_eq!(names(&sub), vec!["N:A"]);
        assert_eq!(sub.edge_count(), 0);
    }

    #[test]
    fn k_two_on_path() {
        let sub = k_hop_filter(&path_abcd(), &[id("N:A")], 2).unwrap();
        assert_eq!(names(&sub), vec!["N:A", "N:B", "N:C"]);
        let pairs: Vec<_> = sub
            .undirected_pairs()
            .into_iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect();
        assert_eq!(pairs, vec!["N:A-N:B", "N:B-N:C"]);
    }

    #[test]
    fn unknown_seed_is_reported() {
        let err = k_hop_filter(&path_abcd(), &[id("N:A"), id("N:Z"), id("N:Y")], 1).unwrap_err();
        match err {
            GraphError::UnknownSeeds(ids) => {
                assert_eq!(ids, vec![id("N:Y"), id("N:Z")]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn filtering_follows_edges_against_their_direction() {
        let g = graph_from(&[("N:B", "N:A"), ("N:C", "N:B")]);
        let sub = k_hop_filter(&g, &[id("N:A")], 2).unwrap();
        assert_eq!(sub.node_count(), 3);
    }

    #[test]
    fn summary_examples() {
        let two = graph_from(&[("N:A", "N:B")]);
        let s = graph_summary(&two).unwrap();
        assert_eq!(s.average_degree, 1.0);

        let tri = graph_from(&[("N:A", "N:B"), ("N:B", "N:C"), ("N:C", "N:A")]);
        let s = graph_summary(&tri).unwrap();
        assert_eq!(s.average_degree, 2.0);
        assert!(!s.has_isolated_nodes);
        assert!(!s.has_self_loops);

        let mut iso = tri.clone();
        iso.add_node(id("N:Z"));
        assert!(graph_summary(&iso).unwrap().has_isolated_nodes);

        assert!(matches!(graph_summary(&KnowledgeGraph::new()), Err(GraphError::EmptyGraph)));
    }

    #[test]
    fn summary_counts_parallel_typed_edges_once() {
        let mut g = graph_from(&[("N:A", "N:B")]);
        g.add_edge(Edge::new(id("N:B"), "other", id("N:A"), Provenance::TextMining))
            .unwrap();
        let s = graph_summary(&g).unwrap();
        assert_eq!(s.edge_count, 1);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn degree_examples() {
        let mut g = graph_from(&[("N:C", "N:1"), ("N:C", "N:2"), ("N:3", "N:C")]);
        g.add_node(id("N:iso"));
        assert_eq!(degree(&g, &id("N:iso")).unwrap(), 0);
        assert_eq!(degree(&g, &id("N:C")).unwrap(), 3);
        assert!(degree(&g, &id("N:missing")).is_err());

        // A drug with five typed edges, two of which join the same pair.
        let mut drug = KnowledgeGraph::new();
        let d = id("DrugBank_Compound:DB00335");
        for (rel, other) in [
            ("-treats->", "MeSH_Disease:D002311"),
            ("-drug_targets_protein->", "UniProt:P08588"),
            ("-drug_targets_protein->", "UniProt:Q15822"),
            ("-compound_classified_as_drug_class->", "ATC_Class:C07AB03"),
            ("-compound_associated_with_disease->", "MeSH_Disease:D002311"),
        ] {
            drug.add_edge(Edge::new(d.clone(), rel, id(other), Provenance::KnowledgeBase))
                .unwrap();
        }
        assert_eq!(degree(&drug, &d).unwrap(), 5);
    }

    #[test]
    fn merge_examples() {
        let g = graph_from(&[("N:A", "N:B"), ("N:B", "N:C")]);
        assert_eq!(merge_graphs(&g, &KnowledgeGraph::new()).unwrap(), g);
        assert_eq!(merge_graphs(&g, &g).unwrap(), g);

        let left = graph_from(&[("L:1", "L:2")]);
        let right = graph_from(&[("R:1", "R:2")]);
        let m = merge_graphs(&left, &right).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.edge_count(), 2);
    }

    #[test]
    fn merge_rejects_feature_dimension_conflict() {
        let mut a = graph_from(&[("N:A", "N:B")]);
        a.set_features(&id("N:A"), vec![1.0, 2.0]).unwrap();
        let mut b = graph_from(&[("N:A", "N:C")]);
        b.set_features(&id("N:C"), vec![1.0, 2.0, 3.0]).unwrap();
        let err = merge_graphs(&a, &b).unwrap_err();
        assert!(err.to_string().contains('2') && err.to_string().contains('3'));
    }

    #[test]
    fn merge_keeps_first_weight_and_provenance() {
        let mut a = KnowledgeGraph::new();
        a.add_edge(Edge::new(id("P:1"), "assoc", id("D:1"), Provenance::TextMining).with_weight(0.4))
            .unwrap();
        let mut b = KnowledgeGraph::new();
        b.add_edge(Edge::new(id("P:1"), "assoc", id("D:1"), Provenance::TextMining).with_weight(0.9))
            .unwrap();
        b.add_edge(Edge::new(id("P:1"), "assoc", id("D:1"), Provenance::KnowledgeBase))
            .unwrap();
        let m = merge_graphs(&a, &b).unwrap();
        assert_eq!(m.edge_count(), 2);
        let tm: Vec<_> = m.edges().filter(|e| e.provenance == Provenance::TextMining).collect();
        assert_eq!(tm[0].weight, Some(0.4));
    }

    // ---- property tests ----

    fn arb_graph(max_nodes: usize) -> impl Strategy<Value = KnowledgeGraph> {
        (1..=max_nodes).prop_flat_map(|n| {
            let edge = (0..n, 0..n, 0..3usize, 0..2usize);
            (Just(n), prop::collection::vec(edge, 0..(3 * n)))
        })
        .prop_map(|(n, edges)| {
            let mut g = KnowledgeGraph::new();
            for i in 0..n {
                g.add_node(NodeId::new("N", &i.to_string()).unwrap());
            }
            for (a, b, rel, prov) in edges {
                let provenance = if prov == 0 { Provenance::KnowledgeBase } else { Provenance::TextMining };
                let mut e = Edge::new(
                    NodeId::new("N", &a.to_string()).unwrap(),
                    ["r0", "r1", "-treats->"][rel],
                    NodeId::new("N", &b.to_string()).unwrap(),
                    provenance,
                );
                // Weight is a function of the key so no two graphs disagree.
                e.weight = Some((a * 31 + b * 7 + rel) as f64 / 100.0);
                g.add_edge(e).unwrap();
            }
            g
        })
    }

    /// Independent distances: Bellman-Ford style relaxation over the
    /// undirected pair list until fixpoint.
    fn oracle_ball(g: &KnowledgeGraph, seeds: &[NodeId], k: usize) -> BTreeSet<NodeId> {
        let pairs = g.undirected_pairs();
        let mut dist: BTreeMap<NodeId, usize> = seeds.iter().map(|s| (s.clone(), 0)).collect();
        loop {
            let mut changed = false;
            for (a, b) in &pairs {
                for (x, y) in [(a, b), (b, a)] {
                    if let Some(&dx) = dist.get(x) {
                        let cand = dx + 1;
                        if dist.get(y).is_none_or(|&dy| cand < dy) {
                            dist.insert(y.clone(), cand);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist.into_iter().filter(|(_, d)| *d <= k).map(|(n, _)| n).collect()
    }

    proptest! {
        #[test]
        fn k_hop_matches_oracle_and_is_monotone(g in arb_graph(25), seed_picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4), k in 0usize..4) {
            let nodes: Vec<NodeId> = g.nodes().cloned().collect();
            let seeds: Vec<NodeId> = seed_picks.iter().map(|i| i.get(&nodes).clone()).collect();
            let sub = k_hop_filter(&g, &seeds, k).unwrap();
            let got: BTreeSet<NodeId> = sub.nodes().cloned().collect();
            prop_assert_eq!(&got, &oracle_ball(&g, &seeds, k));
            prop_assert!(sub.check_integrity());
            for e in sub.edges() {
                prop_assert!(g.contains_edge(&e.key()));
            }
            let bigger = k_hop_filter(&g, &seeds, k + 1).unwrap();
            prop_assert!(sub.nodes().all(|n| bigger.contains_node(n)));
            prop_assert!(sub.edge_keys().all(|e| bigger.contains_edge(e)));
        }

        #[test]
        fn merge_is_commutative_and_associative(a in arb_graph(8), b in arb_graph(8), c in arb_graph(8)) {
            let ab = merge_graphs(&a, &b).unwrap();
            let ba = merge_graphs(&b, &a).unwrap();
            prop_assert_eq!(&ab, &ba);
            let ab_c = merge_graphs(&ab, &c).unwrap();
            let a_bc = merge_graphs(&a, &merge_graphs(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(&ab_c, &a_bc);
            prop_assert_eq!(&merge_graphs(&ab, &b).unwrap(), &ab);
            prop_assert!(ab_c.check_integrity());
        }

        #[test]
        fn average_degree_identity(g in arb_graph(20)) {
            let s = graph_summary(&g).unwrap();
            prop_assert!((s.average_degree - 2.0 * s.edge_count as f64 / s.node_count as f64).abs() < 1e-9);
        }
    }
}
