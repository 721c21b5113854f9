//! Read-only Cypher subset: `MATCH`, `OPTIONAL MATCH`, `WHERE`, `WITH`,
//! `RETURN`, `ORDER BY`, `LIMIT` and `UNION ALL` over a [`KnowledgeGraph`].
//!
//! Labels test a node's namespace, relationship types test the edge's
//! relation string exactly, and `n.name` is the canonical `namespace:id`.
//!
//! ```
//! use hypograph_core::cypher;
//! use hypograph_core::graph::{Edge, KnowledgeGraph, NodeId, Provenance};
//!
//! let mut g = KnowledgeGraph::new();
//! let drug = NodeId::parse("DrugBank_Compound:DB00264").unwrap();
//! let disease = NodeId::parse("MeSH_Disease:D002312").unwrap();
//! g.add_edge(Edge::new(drug, "-treats->", disease, Provenance::KnowledgeBase)).unwrap();
//!
//! let table = cypher::run("MATCH (d)-[:`-treats->`]->(x:MeSH_Disease) RETURN d.name AS drug", &g).unwrap();
//! assert_eq!(table.rows[0][0].as_str(), Some("DrugBank_Compound:DB00264"));
//! ```

mod ast;
mod diag;
mod exec;
mod lexer;
mod parser;
mod printer;
pub mod reference;
mod validate;
mod value;

pub use ast::*;
pub use diag::{DiagKind, Diagnostics};
pub use exec::{execute, execute_with_stats, ExecStats};
pub use parser::parse;
pub use printer::{print_expr, print_pattern, print_query, quote};
pub use validate::column_name;
pub use value::{ResultTable, Value};

use crate::graph::KnowledgeGraph;

/// Parses and runs the bind and type checks without executing.
pub fn validate(query_text: &str) -> Result<QueryAst, Diagnostics> {
    let ast = parse(query_text)?;
    validate::check(&ast)?;
    Ok(ast)
}

/// Parse, validate and execute in one step.
pub fn run(query_text: &str, graph: &KnowledgeGraph) -> Result<ResultTable, Diagnostics> {
    execute(&parse(query_text)?, graph)
}
