use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{ExplainError, Explanation};
use crate::graph::NodeId;

/// Widest pen in the DOT rendering; an edge with score s gets `s` times this.
const MAX_PENWIDTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFiles {
    pub tsv: PathBuf,
    pub dot: PathBuf,
}

fn stem(e: &Explanation) -> String {
    format!("{}_{}_edge_importance", e.target.0, e.target.1)
}

pub fn tsv_path(dir: &Path, e: &Explanation) -> PathBuf {
    dir.join(format!("{}.tsv", stem(e)))
}

pub fn dot_path(dir: &Path, e: &Explanation) -> PathBuf {
    dir.join(format!("{}.dot", stem(e)))
}

fn quote(id: &NodeId) -> String {
    format!("\"{}\"", id.as_str().replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_tsv(e: &Explanation) -> String {
    let mut s = String::from("head\ttail\tscore\n");
    for ((a, b), score) in e.ranked_edges() {
        let _ = writeln!(s, "{a}\t{b}\t{score}");
    }
    let _ = writeln!(s, "{}\t{}\t1.0", e.target.0, e.target.1);
    s
}

pub fn to_dot(e: &Explanation) -> String {
    let mut s = String::from("graph explanation {\n  node [shape=ellipse];\n");
    let mut nodes: std::collections::BTreeSet<&NodeId> = e.computation_subgraph.nodes().collect();
    nodes.insert(&e.target.0);
    nodes.insert(&e.target.1);
    for n in nodes {
        let _ = writeln!(s, "  {};", quote(n));
    }
    for ((a, b), score) in e.ranked_edges() {
        let _ = writeln!(
            s,
            "  {} -- {} [penwidth={:.4}, label=\"{:.3}\"];",
            quote(&a),
            quote(&b),
            MAX_PENWIDTH * score,
            score
        );
    }
    let _ = writeln!(
        s,
        "  {} -- {} [style=dashed, color=red, penwidth={MAX_PENWIDTH:.4}, label=\"p={:.4}\"];",
        quote(&e.target.0),
        quote(&e.target.1),
        e.predicted_probability
    );
    s.push_str("}\n");
    s
}

/// Writes the importance table and a DOT rendering into `dir`.
pub fn export_explanation(e: &Explanation, dir: &Path) -> Result<ExportedFiles, ExplainError> {
    let files = ExportedFiles { tsv: tsv_path(dir, e), dot: dot_path(dir, e) };
    std::fs::write(&files.tsv, to_tsv(e))?;
    std::fs::write(&files.dot, to_dot(e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::KnowledgeGraph;
    use std::collections::BTreeMap;

    fn id(s: &str) -> NodeId {
        NodeId::parse(s).unwrap()
    }

    fn sample(scores: &[(&str, &str, f64)]) -> Explanation {
        let edge_scores: BTreeMap<_, _> = scores.iter().map(|(a, b, s)| ((id(a), id(b)), *s)).collect();
        Explanation {
            target: (id("DrugBank_Compound:DB00335"), id("MeSH_Disease:D002313")),
            predicted_probability: 0.83,
            masked_probability: 0.8,
            top_k: Vec::new(),
            edge_scores,
            objective: Vec::new(),
            computation_subgraph: KnowledgeGraph::new(),
        }
    }

    #[test]
    fn target_row_comes_last() {
        let e = sample(&[("A:1", "A:2", 0.2), ("A:1", "A:3", 0.9), ("A:2", "A:3", 0.5)]);
        let t = to_tsv(&e);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "head\ttail\tscore");
        assert_eq!(lines[1], "A:1\tA:3\t0.9");
        assert_eq!(lines[3], "A:1\tA:2\t0.2");
        assert_eq!(lines[4], "DrugBank_Compound:DB00335\tMeSH_Disease:D002313\t1.0");
    }

    #[test]
    fn equal_scores_sort_lexicographically() {
        let e = sample(&[("B:1", "B:2", 0.5), ("A:2", "A:3", 0.5), ("A:1", "B:9", 0.5)]);
        let rows: Vec<String> = to_tsv(&e).lines().skip(1).take(3).map(String::from).collect();
        assert_eq!(rows, ["A:1\tB:9\t0.5", "A:2\tA:3\t0.5", "B:1\tB:2\t0.5"]);
    }

    #[test]
    fn writes_named_files() {
        let e = sample(&[("A:1", "A:2", 0.2)]);
        let dir = tempfile::tempdir().unwrap();
        let f = export_explanation(&e, dir.path()).unwrap();
        assert_eq!(
            f.tsv.file_name().unwrap().to_str().unwrap(),
            "DrugBank_Compound:DB00335_MeSH_Disease:D002313_edge_importance.tsv"
        );
        let d = std::fs::read_to_string(&f.dot).unwrap();
        assert!(d.contains("style=dashed") && d.contains("p=0.8300"));
        assert!(d.contains("penwidth=1.0000"));
        let missing = dir.path().join("nope");
        assert!(matches!(export_explanation(&e, &missing), Err(ExplainError::Io(_))));
    }
}
