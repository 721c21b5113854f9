use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{LinkPredError, Pair, Predictor};
use crate::graph::{ordered_pair, NodeId};

pub const PREDICTIONS_FILE: &str = "prediction_results.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub head: NodeId,
    pub tail: NodeId,
    pub probability: f64,
    pub rank: usize,
}

/// One scored pair; pairs already connected carry no rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub head: NodeId,
    pub tail: NodeId,
    pub probability: f64,
    pub rank: Option<usize>,
    pub excluded_existing: bool,
}

/// One `NodeId<TAB>NodeId` pair per line; blank lines and `#` comments are
/// skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<Pair>, LinkPredError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| LinkPredError::Pairs { line: i + 1, message };
        let mut parts = line.split('\t');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected two tab-separated node ids, got '{line}'")));
        };
        let a = NodeId::parse(a.trim()).map_err(|e| err(e.to_string()))?;
        let b = NodeId::parse(b.trim()).map_err(|e| err(e.to_string()))?;
        out.push((a, b));
    }
    Ok(out)
}

/// Scores every known pair, flags pairs already linked by any relation and
/// ranks the rest by probability (ties by head, then tail). Returns the top
/// `n` predictions and the full table.
pub fn predict_candidates(
    predictor: &Predictor<'_>,
    pairs: &[Pair],
    n: usize,
) -> Result<(Vec<Prediction>, Vec<PredictionRow>), LinkPredError> {
    if n < 1 {
        return Err(LinkPredError::Config("number of predictions must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for (a, b) in pairs {
        let p = match predictor.score_edge(a, b) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("skipping pair {a}\t{b}: {e}");
                continue;
            }
        };
        let existing = a == b || predictor.graph.connected(a, b);
        rows.push(PredictionRow { head: a.clone(), tail: b.clone(), probability: p, rank: None, excluded_existing: existing });
    }
    rows.sort_by(|x, y| {
        x.excluded_existing
            .cmp(&y.excluded_existing)
            .then(y.probability.total_cmp(&x.probability))
            .then_with(|| x.head.cmp(&y.head))
            .then_with(|| x.tail.cmp(&y.tail))
    });
    let mut seen = std::collections::HashSet::new();
    let mut rank = 0;
    for r in rows.iter_mut().filter(|r| !r.excluded_existing) {
        if seen.insert(ordered_pair(&r.head, &r.tail)) {
            rank += 1;
            r.rank = Some(rank);
        }
    }
    let top = rows
        .iter()
        .filter_map(|r| match r.rank {
            Some(rank) if rank <= n => {
                Some(Prediction { head: r.head.clone(), tail: r.tail.clone(), probability: r.probability, rank })
            }
            _ => None,
        })
        .collect();
    Ok((top, rows))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `prediction_results.csv` into `dir` and returns its path.
pub fn write_predictions(dir: &Path, rows: &[PredictionRow]) -> Result<std::path::PathBuf, LinkPredError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(PREDICTIONS_FILE);
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(w, "head,relation,tail,probability,rank,excluded_existing")?;
    for r in rows {
        writeln!(
            w,
            "{},predicted_link,{},{},{},{}",
            csv_field(r.head.as_str()),
            csv_field(r.tail.as_str()),
            r.probability,
            r.rank.map(|k| k.to_string()).unwrap_or_default(),
            r.excluded_existing
        )?;
    }
    w.flush()?;
    Ok(path)
}
