//! Drafts Cypher with the query agent, repairs it with the verification
//! agent and executes it against the in-memory graph.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use hypograph_core::cypher::{run, ResultTable};
use hypograph_core::graph::KnowledgeGraph;

use super::entities::{format_entities, EntityMatch};
use super::{AgentCtx, AgentError};
use crate::gateway::AgentName;

const SAMPLE_TRIPLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CypherAttempt {
    pub query: String,
    /// Set when the query failed to parse, validate or execute.
    pub diagnostics: Option<String>,
    /// Row count when it ran.
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifiedQuery {
    pub query: String,
    pub table: ResultTable,
    pub attempts: Vec<CypherAttempt>,
}

/// Namespaces, relation names and a few example triples per relation.
pub fn schema_summary(graph: &KnowledgeGraph) -> String {
    let mut s = String::new();
    let namespaces: Vec<&str> = graph.namespaces().into_iter().collect();
    let _ = writeln!(s, "Node labels: {}", namespaces.join(", "));
    let relations: Vec<&str> = graph.relations().into_iter().collect();
    let _ = writeln!(s, "Relationship types (write them in backticks): {}", relations.join(", "));
    let _ = writeln!(s, "Example triples:");
    for r in relations {
        for key in graph.edges_with_relation(r).take(SAMPLE_TRIPLES) {
            let _ = writeln!(s, "({})-[:`{}`]->({})", key.head, key.relation, key.tail);
        }
    }
    s
}

/// Drops Markdown code fences and a trailing semicolon around a model reply.
pub fn strip_fences(reply: &str) -> String {
    let text = reply.trim();
    let body = match text.find("```") {
        Some(open) => {
            let after = &text[open + 3..];
            let after = after.find('\n').map_or(after, |nl| {
                let tag = &after[..nl];
                if tag.trim().chars().all(|c| c.is_alphanumeric()) { &after[nl + 1..] } else { after }
            });
            after.find("```").map_or(after, |close| &after[..close])
        }
        None => text,
    };
    body.trim().trim_end_matches(';').trim_end().to_string()
}

/// Drafts, validates, repairs and runs a query for `question`. An empty
/// result earns one reformulation round; if that is empty too, the last
/// empty table is returned.
pub fn generate_verified_cypher(
    ctx: &AgentCtx<'_>,
    question: &str,
    entities: &[EntityMatch],
    max_attempts: usize,
) -> Result<VerifiedQuery, AgentError> {
    if max_attempts == 0 {
        return Err(AgentError::Usage("max_attempts must be at least 1".into()));
    }
    let graph = &ctx.res.graph;
    let schema = schema_summary(graph);
    let entity_text = format_entities(graph, entities);
    let mut reply = ctx.ask(
        AgentName::CypherQuery,
        "cypher_query",
        &[("schema", schema.clone()), ("entities", entity_text.clone()), ("question", question.to_string())],
    )?;
    let mut attempts = Vec::new();
    let mut last_empty: Option<(String, ResultTable)> = None;
    let mut reformulated = false;
    for attempt in 1..=max_attempts {
        let query = strip_fences(&reply);
        let last = attempt == max_attempts;
        match run(&query, graph) {
            Err(diag) => {
                let diagnostics = diag.to_string();
                attempts.push(CypherAttempt { query: query.clone(), diagnostics: Some(diagnostics.clone()), rows: None });
                if last {
                    break;
                }
                reply = ctx.ask(
                    AgentName::QueryVerification,
                    "query_verification",
                    &[
                        ("schema", schema.clone()),
                        ("question", question.to_string()),
                        ("query", query),
                        ("diagnostics", diagnostics),
                    ],
                )?;
            }
            Ok(table) if table.is_empty() => {
                attempts.push(CypherAttempt { query: query.clone(), diagnostics: None, rows: Some(0) });
                last_empty = Some((query.clone(), table));
                if reformulated || last {
                    break;
                }
                reformulated = true;
                reply = ctx.ask(
                    AgentName::QueryVerification,
                    "query_reformulation",
                    &[
                        ("schema", schema.clone()),
                        ("entities", entity_text.clone()),
                        ("question", question.to_string()),
                        ("query", query),
                    ],
                )?;
            }
            Ok(table) => {
                attempts.push(CypherAttempt { query: query.clone(), diagnostics: None, rows: Some(table.len()) });
                return Ok(VerifiedQuery { query, table, attempts });
            }
        }
    }
    match last_empty {
        Some((query, table)) => Ok(VerifiedQuery { query, table, attempts }),
        None => Err(AgentError::Verification { attempts }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fences_are_stripped() {
        assert_eq!(strip_fences("```cypher\nMATCH (n) RETURN n;\n```"), "MATCH (n) RETURN n");
        assert_eq!(strip_fences("Here:\n```\nMATCH (n) RETURN n\n```\nDone"), "MATCH (n) RETURN n");
        assert_eq!(strip_fences("  MATCH (n) RETURN n  "), "MATCH (n) RETURN n");
    }
}
