//! Links mentions in a user query to graph nodes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hypograph_core::embed::{ChunkSource, EmbedError, Embedder, EmbeddingIndex};
use hypograph_core::graph::{KnowledgeGraph, NodeId};

use crate::config::AgentSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    ExactName,
    NormalizedName,
    VectorSimilarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub query_span: String,
    pub node: NodeId,
    pub method: MatchMethod,
    pub similarity: f64,
}

/// Lowercased alphanumeric runs with their byte ranges.
fn words(text: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i, text[s..i].to_lowercase()));
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Normalized surface forms of every node: the local id, the full node
/// text, the text before a trailing parenthetical and the parenthetical
/// itself (usually an abbreviation).
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<(Vec<String>, NodeId)>,
}

impl Lexicon {
    pub fn build(graph: &KnowledgeGraph) -> Self {
        let mut entries = Vec::new();
        for node in graph.nodes() {
            let mut forms: Vec<&str> = vec![node.local_id()];
            if let Some(text) = graph.node_text(node) {
                forms.push(text);
                if let (Some(open), true) = (text.rfind(" ("), text.ends_with(')')) {
                    forms.push(&text[..open]);
                    forms.push(&text[open + 2..text.len() - 1]);
                }
            }
            for form in forms {
                let w: Vec<String> = words(form).into_iter().map(|(_, _, s)| s).collect();
                if w.is_empty() || w.iter().map(String::len).sum::<usize>() < 3 {
                    continue;
                }
                if !entries.iter().any(|(e, n)| e == &w && n == node) {
                    entries.push((w, node.clone()));
                }
            }
        }
        Self { entries }
    }
}

fn is_id_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn exact_matches(query: &str, graph: &KnowledgeGraph) -> Vec<EntityMatch> {
    let mut out = Vec::new();
    for node in graph.nodes() {
        let id = node.as_str();
        let mut from = 0;
        while let Some(pos) = query[from..].find(id) {
            let start = from + pos;
            let end = start + id.len();
            let before_ok = query[..start].chars().next_back().is_none_or(|c| !is_id_char(c));
            let after_ok = query[end..].chars().next().is_none_or(|c| !is_id_char(c));
            if before_ok && after_ok {
                out.push(EntityMatch {
                    query_span: id.to_string(),
                    node: node.clone(),
                    method: MatchMethod::ExactName,
                    similarity: 1.0,
                });
                break;
            }
            from = start + query[start..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

fn normalized_matches(query: &str, lexicon: &Lexicon) -> Vec<EntityMatch> {
    let q = words(query);
    let mut out = Vec::new();
    for (form, node) in &lexicon.entries {
        if form.len() > q.len() {
            continue;
        }
        if let Some(i) = (0..=q.len() - form.len()).find(|&i| q[i..i + form.len()].iter().map(|w| &w.2).eq(form.iter())) {
            out.push(EntityMatch {
                query_span: query[q[i].0..q[i + form.len() - 1].1].to_string(),
                node: node.clone(),
                method: MatchMethod::NormalizedName,
                similarity: 1.0,
            });
        }
    }
    out
}

/// Exact id hits, then normalized name hits, then vector search over node
/// chunks above the configured threshold; one match per node, keeping the
/// strongest.
pub fn link_entities(
    query: &str,
    graph: &KnowledgeGraph,
    lexicon: &Lexicon,
    index: &EmbeddingIndex,
    embedder: &dyn Embedder,
    settings: &AgentSettings,
) -> Result<Vec<EntityMatch>, EmbedError> {
    let mut found = exact_matches(query, graph);
    found.extend(normalized_matches(query, lexicon));
    if !query.trim().is_empty() {
        let v = embedder.embed(query)?;
        for hit in index.search_where(&v, settings.link_candidates, |c| c.source == ChunkSource::KgNode)? {
            let Some(node) = hit.chunk.nodes.first() else { continue };
            if hit.similarity >= settings.link_threshold && graph.contains_node(node) {
                found.push(EntityMatch {
                    query_span: query.trim().to_string(),
                    node: node.clone(),
                    method: MatchMethod::VectorSimilarity,
                    similarity: hit.similarity.clamp(0.0, 1.0),
                });
            }
        }
    }
    let better = |a: &EntityMatch, b: &EntityMatch| {
        b.similarity.total_cmp(&a.similarity).then(a.method.cmp(&b.method)).then(a.query_span.cmp(&b.query_span))
    };
    let mut best: BTreeMap<NodeId, EntityMatch> = BTreeMap::new();
    for m in found {
        match best.get(&m.node) {
            Some(cur) if better(cur, &m).is_le() => {}
            _ => {
                best.insert(m.node.clone(), m);
            }
        }
    }
    let mut out: Vec<EntityMatch> = best.into_values().collect();
    out.sort_by(|a, b| better(a, b).then(a.node.cmp(&b.node)));
    Ok(out)
}

/// Prompt rendering of a match list.
pub fn format_entities(graph: &KnowledgeGraph, entities: &[EntityMatch]) -> String {
    if entities.is_empty() {
        return "none".to_string();
    }
    entities
        .iter()
        .map(|m| {
            let desc = graph.node_text(&m.node).map(|t| format!(" ({t})")).unwrap_or_default();
            let method = match m.method {
                MatchMethod::ExactName => "exact",
                MatchMethod::NormalizedName => "name",
                MatchMethod::VectorSimilarity => "similar",
            };
            format!("- \"{}\" -> {}{desc} [{method}, {:.3}]", m.query_span, m.node, m.similarity)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypograph_core::embed::{IndexConfig, IndexSources, ReferenceEmbedder};
    use hypograph_core::graph::{Edge, Provenance};

    fn setup() -> (KnowledgeGraph, Lexicon, EmbeddingIndex) {
        let mut g = KnowledgeGraph::new();
        let n = |s: &str| NodeId::parse(s).unwrap();
        for (a, b) in [("MeSH_Disease:D002312", "DrugBank_Compound:DB00335"), ("MeSH_Disease:D002311", "DrugBank_Compound:DB00335")] {
            g.add_edge(Edge::new(n(a), "treats", n(b), Provenance::KnowledgeBase)).unwrap();
        }
        g.set_node_text(&n("MeSH_Disease:D002311"), "Dilated Cardiomyopathy (DCM)").unwrap();
        g.set_node_text(&n("MeSH_Disease:D002312"), "Arrhythmogenic Right Ventricular Dysplasia (ACM)").unwrap();
        g.set_node_text(&n("DrugBank_Compound:DB00335"), "Atenolol").unwrap();
        let lex = Lexicon::build(&g);
        let idx = EmbeddingIndex::build(IndexSources { graph: Some(&g), docs: None }, &IndexConfig::default(), &ReferenceEmbedder::default()).unwrap();
        (g, lex, idx)
    }

    fn link(q: &str) -> Vec<EntityMatch> {
        let (g, lex, idx) = setup();
        link_entities(q, &g, &lex, &idx, &ReferenceEmbedder::default(), &AgentSettings::default()).unwrap()
    }

    #[test]
    fn exact_id() {
        let m = link("drugs for MeSH_Disease:D002312?");
        assert_eq!(m[0].node.as_str(), "MeSH_Disease:D002312");
        assert_eq!((m[0].method, m[0].similarity), (MatchMethod::ExactName, 1.0));
        assert!(link("MeSH_Disease:D0023120").iter().all(|m| m.method != MatchMethod::ExactName));
    }

    #[test]
    fn normalized_name_and_abbreviation() {
        let m = link("Is atenolol useful in dilated-cardiomyopathy?");
        let dcm = m.iter().find(|m| m.node.as_str() == "MeSH_Disease:D002311").unwrap();
        assert_eq!(dcm.method, MatchMethod::NormalizedName);
        assert_eq!(dcm.query_span, "dilated-cardiomyopathy");
        assert!(m.iter().any(|m| m.node.as_str() == "DrugBank_Compound:DB00335" && m.query_span == "atenolol"));
        let acm = link("treat ACM");
        assert_eq!(acm[0].node.as_str(), "MeSH_Disease:D002312");
        assert_eq!(acm[0].query_span, "ACM");
    }

    #[test]
    fn gibberish_links_nothing() {
        assert!(link("qwzx plorf vrrk").is_empty());
        assert!(link("").is_empty());
    }

    #[test]
    fn sorted_and_deduplicated() {
        let m = link("MeSH_Disease:D002311 dilated cardiomyopathy D002311");
        assert_eq!(m.iter().filter(|x| x.node.as_str() == "MeSH_Disease:D002311").count(), 1);
        assert_eq!(m[0].method, MatchMethod::ExactName);
        assert!(m.windows(2).all(|w| w[0].similarity >= w[1].similarity));
    }
}
