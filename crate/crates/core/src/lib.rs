//! Knowledge-graph storage, a read-only Cypher subset, literature indexing
//! and an explainable GCN link predictor.

pub mod cypher;
pub mod graph;
pub mod corpus;
pub mod embed;
pub mod explain;
pub mod linkpred;
pub mod synth;
