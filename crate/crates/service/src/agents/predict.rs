//! The `predict` command: candidate pairs from the linked entities, model
//! scores, explanations and their narratives.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use hypograph_core::explain::{explain_edge, export_explanation, Explanation};
use hypograph_core::graph::{KnowledgeGraph, NodeId};
use hypograph_core::linkpred::{predict_candidates, Pair, Predictor};

use super::entities::link_entities;
use super::interpret::{interpret_prediction, node_label};
use super::{sha256_hex, AgentCtx, AgentError, Evidence, ScoredEdge};

pub struct PredictOutput {
    pub answer_text: String,
    pub evidence: Vec<Evidence>,
    pub explanations: Vec<(String, Explanation)>,
}

fn is_disease(n: &NodeId) -> bool {
    n.namespace().contains("Disease")
}

fn is_compound(n: &NodeId) -> bool {
    n.namespace().contains("Compound")
}

fn is_drug_class(n: &NodeId) -> bool {
    n.namespace().starts_with("ATC")
}

fn count(n: usize, noun: &str) -> String {
    if n == 1 { format!("1 {noun}") } else { format!("{n} {noun}s") }
}

/// Stable id for a predicted pair, safe in URLs.
pub fn prediction_id(head: &NodeId, tail: &NodeId) -> String {
    sha256_hex(&format!("{head}\t{tail}"))[..16].to_string()
}

/// "top 3" in the request overrides the configured prediction count.
pub fn requested_count(payload: &str) -> Option<usize> {
    let words: Vec<String> = payload
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    words.windows(2).find(|w| w[0] == "top").and_then(|w| w[1].parse().ok()).filter(|n| *n > 0)
}

/// Drugs named directly plus members of named drug classes, crossed with
/// the named diseases. With no drug or class named, every compound is a
/// candidate.
pub fn candidate_pairs(graph: &KnowledgeGraph, linked: &[NodeId]) -> Result<(Vec<Pair>, usize, usize), AgentError> {
    let diseases: BTreeSet<&NodeId> = linked.iter().filter(|n| is_disease(n)).collect();
    if diseases.is_empty() {
        return Err(AgentError::Usage(
            "predict: the request names no disease in the graph; mention a disease by name or id".into(),
        ));
    }
    let mut drugs: BTreeSet<&NodeId> = linked.iter().filter(|n| is_compound(n)).collect();
    for class in linked.iter().filter(|n| is_drug_class(n)) {
        drugs.extend(graph.neighbors(class).into_iter().filter(|n| is_compound(n)));
    }
    if drugs.is_empty() {
        drugs = graph.nodes().filter(|n| is_compound(n)).collect();
    }
    let pairs: Vec<Pair> = drugs
        .iter()
        .flat_map(|d| diseases.iter().map(move |s| ((*d).clone(), (*s).clone())))
        .collect();
    Ok((pairs, drugs.len(), diseases.len()))
}

pub fn predict(ctx: &AgentCtx<'_>, payload: &str) -> Result<PredictOutput, AgentError> {
    let res = ctx.res;
    let model = res.model.as_ref().ok_or_else(|| AgentError::NoModel(res.model_path.clone()))?;
    let entities = link_entities(payload, &res.graph, &res.lexicon, &res.index, res.embedder.as_ref(), &res.settings)?;
    let linked: Vec<NodeId> = entities.iter().map(|e| e.node.clone()).collect();
    let (pairs, n_drugs, n_diseases) = candidate_pairs(&res.graph, &linked)?;
    let n = requested_count(payload).unwrap_or(res.settings.top_predictions);
    let predictor = Predictor::new(model, &res.graph)?;
    let (top, rows) = predict_candidates(&predictor, &pairs, n)?;
    let excluded = rows.iter().filter(|r| r.excluded_existing).count();

    let mut s = String::from("[Performing Explainable Link Prediction]\n\n");
    let _ = writeln!(
        s,
        "Scored {} candidate pairs ({} x {}); {excluded} already linked pairs were excluded.",
        rows.len(),
        count(n_drugs, "compound"),
        count(n_diseases, "disease")
    );
    if top.is_empty() {
        s.push_str("Every candidate pair is already linked in the graph; there is nothing new to predict.");
        return Ok(PredictOutput { answer_text: s, evidence: Vec::new(), explanations: Vec::new() });
    }
    let _ = writeln!(s, "Top {} predictions:", top.len());
    for p in &top {
        let _ = writeln!(
            s,
            "{}. {} -- {}: {:.4}",
            p.rank,
            node_label(&res.graph, &p.head),
            node_label(&res.graph, &p.tail),
            p.probability
        );
    }

    let mut evidence = Vec::new();
    let mut explanations = Vec::new();
    std::fs::create_dir_all(&res.explanation_dir)
        .map_err(|e| AgentError::Io(format!("{}: {e}", res.explanation_dir.display())))?;
    for p in &top {
        let target = (p.head.clone(), p.tail.clone());
        let expl = explain_edge(&predictor, &target, res.settings.top_k, &res.explain)?;
        let files = export_explanation(&expl, &res.explanation_dir)?;
        let (narrative, relations) = interpret_prediction(ctx, p, &expl, &res.graph, model.threshold);
        s.push('\n');
        s.push_str(&narrative);
        let id = prediction_id(&p.head, &p.tail);
        let name = |path: &std::path::Path| path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        evidence.push(Evidence::Prediction {
            prediction_id: id.clone(),
            head: p.head.clone(),
            tail: p.tail.clone(),
            probability: p.probability,
            rank: p.rank,
            top_edges: expl.top_k.iter().map(|((a, b), v)| ScoredEdge { head: a.clone(), tail: b.clone(), score: *v }).collect(),
            tsv_file: name(&files.tsv),
            dot_file: name(&files.dot),
        });
        evidence.extend(relations);
        explanations.push((id, expl));
    }
    Ok(PredictOutput { answer_text: s.trim_end().to_string(), evidence, explanations })
}
