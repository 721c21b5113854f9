//! Flat-file formats: edge-list TSV, node-feature TSV, node-description TSV.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{Edge, EdgeInsert, GraphError, KnowledgeGraph, NodeId, Provenance};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub data_lines: usize,
    pub edges_added: usize,
    pub duplicates: usize,
    pub weight_conflicts: usize,
    pub self_loops_dropped: usize,
    pub malformed: usize,
    /// 1-based line numbers of the first few malformed lines.
    pub malformed_lines: Vec<usize>,
    pub header_skipped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuxLoadReport {
    pub applied: usize,
    pub unknown_nodes: usize,
    pub malformed: usize,
}

fn read(path: &Path) -> Result<String, GraphError> {
    fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Yields `(line_number, content)` for non-blank, non-comment lines with
/// any trailing `\r` removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_edge_line(line: &str, delimiter: char, provenance: Provenance) -> Option<Edge> {
    let fields: Vec<&str> = line.split(delimiter).collect();
    if fields.len() < 3 || fields.len() > 4 {
        return None;
    }
    let head = NodeId::parse(fields[0]).ok()?;
    let relation = fields[1].trim();
    if relation.is_empty() {
        return None;
    }
    let tail = NodeId::parse(fields[2]).ok()?;
    let mut edge = Edge::new(head, relation, tail, provenance);
    if fields.len() == 4 && !fields[3].trim().is_empty() {
        let w: f64 = fields[3].trim().parse().ok()?;
        if !w.is_finite() {
            return None;
        }
        edge.weight = Some(w);
    }
    Some(edge)
}

fn looks_like_header(line: &str, delimiter: char) -> bool {
    let fields: Vec<&str> = line.split(delimiter).collect();
    fields.len() >= 3 && NodeId::parse(fields[2]).is_err()
}

/// Loads a 3- or 4-column edge list. Malformed lines are counted and
/// skipped; the call fails only when every data line is malformed.
pub fn load_edge_list(
    path: &Path,
    provenance: Provenance,
    delimiter: char,
) -> Result<(KnowledgeGraph, LoadReport), GraphError> {
    let text = read(path)?;
    let mut graph = KnowledgeGraph::new();
    let mut report = LoadReport::default();
    for (idx, (line_no, line)) in data_lines(&text).enumerate() {
        if idx == 0 && looks_like_header(line, delimiter) {
            report.header_skipped = true;
            continue;
        }
        report.data_lines += 1;
        let Some(edge) = parse_edge_line(line, delimiter, provenance) else {
            report.malformed += 1;
            if report.malformed_lines.len() < 10 {
                report.malformed_lines.push(line_no);
            }
            continue;
        };
        match graph.add_edge(edge)? {
            EdgeInsert::Added => report.edges_added += 1,
            EdgeInsert::Duplicate => report.duplicates += 1,
            EdgeInsert::WeightConflict => {
                report.weight_conflicts += 1;
                warn!(
                    "{}:{line_no}: conflicting weight for a duplicate edge, keeping the first",
                    path.display()
                );
            }
            EdgeInsert::SelfLoopDropped => report.self_loops_dropped += 1,
        }
    }
    if report.data_lines > 0 && report.malformed == report.data_lines {
        return Err(GraphError::AllLinesMalformed {
            path: path.to_path_buf(),
            malformed: report.malformed,
        });
    }
    if report.malformed > 0 {
        warn!(
            "{}: skipped {} malformed lines (first at {:?})",
            path.display(),
            report.malformed,
            report.malformed_lines
        );
    }
    if report.self_loops_dropped > 0 {
        warn!(
            "{}: dropped {} self-loop edges",
            path.display(),
            report.self_loops_dropped
        );
    }
    Ok((graph, report))
}

/// Reads `NodeId<TAB>v1,v2,...` records into `graph`. Every record must
/// share one dimension; records for nodes absent from the graph are counted
/// and ignored.
pub fn load_node_features(graph: &mut KnowledgeGraph, path: &Path) -> Result<AuxLoadReport, GraphError> {
    let text = read(path)?;
    let mut report = AuxLoadReport::default();
    for (_, line) in data_lines(&text) {
        let Some((id, values)) = line.split_once('\t') else {
            report.malformed += 1;
            continue;
        };
        let Ok(id) = NodeId::parse(id) else {
            report.malformed += 1;
            continue;
        };
        let parsed: Result<Vec<f64>, _> = values.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let Ok(values) = parsed else {
            report.malformed += 1;
            continue;
        };
        if !graph.contains_node(&id) {
            report.unknown_nodes += 1;
            continue;
        }
        graph.set_features(&id, values)?;
        report.applied += 1;
    }
    Ok(report)
}

/// Reads `NodeId<TAB>text` records into `graph`.
pub fn load_node_text(graph: &mut KnowledgeGraph, path: &Path) -> Result<AuxLoadReport, GraphError> {
    let text = read(path)?;
    let mut report = AuxLoadReport::default();
    for (_, line) in data_lines(&text) {
        let Some((id, description)) = line.split_once('\t') else {
            report.malformed += 1;
            continue;
        };
        let Ok(id) = NodeId::parse(id) else {
            report.malformed += 1;
            continue;
        };
        if !graph.contains_node(&id) {
            report.unknown_nodes += 1;
            continue;
        }
        graph.set_node_text(&id, description.trim())?;
        report.applied += 1;
    }
    Ok(report)
}

/// Writes the graph as a tab-separated edge list in key order. Isolated
/// nodes and provenance are not representable in this format.
pub fn write_edge_list(graph: &KnowledgeGraph, path: &Path) -> Result<(), GraphError> {
    let io_err = |source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for edge in graph.edges() {
        let res = match edge.weight {
            Some(w) => writeln!(out, "{}\t{}\t{}\t{}", edge.head, edge.relation, edge.tail, w),
            None => writeln!(out, "{}\t{}\t{}", edge.head, edge.relation, edge.tail),
        };
        res.map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn load(content: &str) -> Result<(KnowledgeGraph, LoadReport), GraphError> {
        let f = write_tmp(content);
        load_edge_list(f.path(), Provenance::KnowledgeBase, '\t')
    }

    #[test]
    fn duplicate_lines_collapse() {
        let (g, r) = load("A:1\tr\tB:2\nA:1\tr\tB:2").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(r.duplicates, 1);
    }

    #[test]
    fn self_loop_is_dropped_but_node_kept() {
        let (g, r) = load("A:1\tr\tA:1").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(r.self_loops_dropped, 1);
    }

    #[test]
    fn fourth_column_is_weight() {
        let (g, _) = load("P:1\tassoc\tD:2\t0.83").unwrap();
        // Reference parse done field by field without the loader.
        let line = "P:1\tassoc\tD:2\t0.83";
        let cols: Vec<&str> = line.split('\t').collect();
        let expected_weight: f64 = cols[3].parse().unwrap();
        let edge = g.edges().next().unwrap();
        assert_eq!(edge.head.as_str(), cols[0]);
        assert_eq!(edge.relation.as_ref(), cols[1]);
        assert_eq!(edge.tail.as_str(), cols[2]);
        assert_eq!(edge.weight, Some(expected_weight));
        assert_eq!(edge.weight, Some(0.83));
    }

    #[test]
    fn malformed_lines_are_counted_not_fatal() {
        let (g, r) = load("A:1\tr\tB:2\njunk\nnocolon\tr\tB:2\nA:1\tr\tC:3\textra\tcol\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(r.malformed, 3);
        assert_eq!(r.malformed_lines, vec![2, 3, 4]);
    }

    #[test]
    fn all_malformed_is_an_error() {
        let err = load("x\ty\nbad line\n").unwrap_err();
        assert!(matches!(err, GraphError::AllLinesMalformed { malformed: 2, .. }));
    }

    #[test]
    fn header_comments_and_crlf_are_tolerated() {
        let (g, r) = load("# comment\r\nhead\trelation\ttail\r\nA:1\tr\tB:2\r\n\r\n").unwrap();
        assert!(r.header_skipped);
        assert_eq!(r.malformed, 0);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges().next().unwrap().tail.as_str(), "B:2");
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_edge_list(Path::new("/nonexistent/kg.tsv"), Provenance::KnowledgeBase, '\t')
            .unwrap_err();
        assert!(matches!(err, GraphError::Io { .. }));
    }

    #[test]
    fn features_and_text_load() {
        let (mut g, _) = load("A:1\tr\tB:2\n").unwrap();
        let f = write_tmp("A:1\t1,2,3\nZ:9\t0,0,0\nbad\n");
        let r = load_node_features(&mut g, f.path()).unwrap();
        assert_eq!(r, AuxLoadReport { applied: 1, unknown_nodes: 1, malformed: 1 });
        assert_eq!(g.features(&NodeId::parse("A:1").unwrap()), Some(&[1.0, 2.0, 3.0][..]));
        assert_eq!(g.feature_dim(), Some(3));

        let bad_dim = write_tmp("B:2\t1,2\n");
        assert!(load_node_features(&mut g, bad_dim.path()).is_err());

        let t = write_tmp("B:2\tDilated Cardiomyopathy\n");
        load_node_text(&mut g, t.path()).unwrap();
        assert_eq!(g.node_text(&NodeId::parse("B:2").unwrap()), Some("Dilated Cardiomyopathy"));
    }

    #[test]
    fn write_then_load_round_trips_edges() {
        let (g, _) = load("A:1\tr\tB:2\t0.5\nB:2\t-treats->\tC:3\n").unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_edge_list(&g, out.path()).unwrap();
        let (back, _) = load_edge_list(out.path(), Provenance::KnowledgeBase, '\t').unwrap();
        assert_eq!(back, g);
    }
}
