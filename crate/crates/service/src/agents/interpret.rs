//! Narrative for one explained prediction.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use hypograph_core::cypher::{quote, run, ResultTable};
use hypograph_core::explain::Explanation;
use hypograph_core::graph::{KnowledgeGraph, NodeId};
use hypograph_core::linkpred::Prediction;

use super::{AgentCtx, Evidence};
use crate::gateway::AgentName;

pub fn node_label(graph: &KnowledgeGraph, node: &NodeId) -> String {
    match graph.node_text(node) {
        Some(t) if !t.is_empty() => format!("{node} ({t})"),
        _ => node.to_string(),
    }
}

/// Query for every stored relation among `nodes`.
pub fn relations_query(nodes: &BTreeSet<&NodeId>) -> String {
    let list = nodes.iter().map(|n| quote(n.as_str())).collect::<Vec<_>>().join(", ");
    format!(
        "MATCH (a)-[r]->(b)\nWHERE a.name IN [{list}] AND b.name IN [{list}]\n\
         RETURN a.name AS head, r.relation AS relation, b.name AS tail\nORDER BY head, relation, tail"
    )
}

fn relation_lines(table: &ResultTable) -> Vec<String> {
    table.rows.iter().map(|r| r.iter().map(|v| v.render()).collect::<Vec<_>>().join(" ")).collect()
}

/// Renders probability, influential edges, implications and reliability
/// sections. Edge scores are printed with `{}` so that each reads back as
/// the stored value. A failed interpreter call leaves the template
/// sections without prose. With no top edges only the probability line is
/// produced.
pub fn interpret_prediction(
    ctx: &AgentCtx<'_>,
    pred: &Prediction,
    expl: &Explanation,
    graph: &KnowledgeGraph,
    threshold: Option<f64>,
) -> (String, Option<Evidence>) {
    let mut s = format!(
        "[Showing output for predicted edge between {} and {}: Predicted probability of {:.4}]\n",
        node_label(graph, &pred.head),
        node_label(graph, &pred.tail),
        pred.probability
    );
    if expl.top_k.is_empty() {
        return (s, None);
    }

    let _ = write!(s, "\nInfluential Nodes and Paths\n\n");
    let mut edges_text = String::new();
    for ((a, b), score) in &expl.top_k {
        let _ = writeln!(s, "- {a}, {b}: score {score}");
        let _ = writeln!(edges_text, "- {}, {}: score {score}", node_label(graph, a), node_label(graph, b));
    }

    let mut nodes: BTreeSet<&NodeId> = BTreeSet::from([&pred.head, &pred.tail]);
    for ((a, b), _) in &expl.top_k {
        nodes.insert(a);
        nodes.insert(b);
    }
    let query = relations_query(&nodes);
    let (relations, evidence) = match run(&query, graph) {
        Ok(table) => {
            let lines = relation_lines(&table);
            let ev = Evidence::Cypher { query, columns: table.columns, rows: table.rows };
            (lines, Some(ev))
        }
        Err(e) => {
            log::warn!("relation lookup failed: {e}");
            (Vec::new(), None)
        }
    };
    let relations_text = if relations.is_empty() { "none".to_string() } else { relations.join("\n") };

    let prose = ctx.ask(
        AgentName::PredictionInterpreter,
        "prediction_interpreter",
        &[
            ("head", node_label(graph, &pred.head)),
            ("tail", node_label(graph, &pred.tail)),
            ("probability", format!("{:.4}", pred.probability)),
            ("edges", edges_text.trim_end().to_string()),
            ("relations", relations_text.clone()),
        ],
    );
    let _ = write!(s, "\nPotential Biological Implications\n\n");
    match prose {
        Ok(p) => {
            let _ = writeln!(s, "{}", p.trim_end());
            s.push('\n');
        }
        Err(e) => log::warn!("prediction interpreter unavailable, using template only: {e}"),
    }
    let _ = writeln!(s, "Existing relations among the involved nodes:");
    if relations.is_empty() {
        let _ = writeln!(s, "- none");
    }
    for r in &relations {
        let _ = writeln!(s, "- {r}");
    }

    let _ = write!(s, "\nStrength and Reliability of the Link Prediction\n\n");
    match threshold {
        Some(t) => {
            let side = if pred.probability >= t { "at or above" } else { "below" };
            let _ = writeln!(
                s,
                "- The predicted probability {:.4} is {side} the model's decision threshold {t:.4}.",
                pred.probability
            );
        }
        None => {
            let _ = writeln!(s, "- The checkpoint records no decision threshold; the probability {:.4} is uncalibrated.", pred.probability);
        }
    }
    let strong = expl.edge_scores.values().filter(|v| **v >= 0.5).count();
    let _ = writeln!(
        s,
        "- The strongest influential edge scores {}; {strong} of {} edges in the computation subgraph score at least 0.5.",
        expl.top_k[0].1,
        expl.edge_scores.len()
    );
    let _ = writeln!(
        s,
        "- Edge scores describe what the trained model relies on, not a verified mechanism; the link needs experimental validation."
    );
    (s, evidence)
}
