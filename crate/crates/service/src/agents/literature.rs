//! Document retrieval, relevance screening and the grouped answer layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hypograph_core::corpus::ArticleType;
use hypograph_core::embed::{ChunkSource, EmbeddingIndex, Hit};

use super::{AgentCtx, AgentError};
use crate::gateway::AgentName;

const PASSAGE_CHARS: usize = 1200;

#[derive(Debug, Clone, PartialEq)]
pub struct RelevantDocument {
    pub pmid: String,
    pub title: String,
    pub article_type: ArticleType,
    pub score: f64,
    /// Best matching section and chunk id.
    pub section: String,
    pub chunk: String,
    pub passages: Vec<String>,
    pub rationale: String,
}

/// Candidate documents owning any of the top `pool` section chunks, ranked
/// by weighted document score (ties by pmid), with their retrieved chunks.
pub fn rank_documents<'a>(
    index: &'a EmbeddingIndex,
    query: &[f64],
    pool: usize,
) -> Result<Vec<(String, f64, Vec<Hit<'a>>)>, AgentError> {
    let hits = index.search_where(query, pool, |c| c.source == ChunkSource::DocSection)?;
    let mut by_doc: BTreeMap<String, Vec<Hit<'a>>> = BTreeMap::new();
    for h in hits {
        if let Some(p) = &h.chunk.pmid {
            by_doc.entry(p.clone()).or_default().push(h);
        }
    }
    let mut ranked = Vec::with_capacity(by_doc.len());
    for (pmid, chunks) in by_doc {
        let score = index.score_document(query, &pmid)?;
        ranked.push((pmid, score, chunks));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Reads an evaluator reply. Only an explicit "irrelevant" (or "not
/// relevant") label drops a document.
pub fn parse_verdict(reply: &str) -> (bool, String) {
    let line = reply.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let bare = line.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = bare.to_lowercase();
    let rest = |label: &str| bare[label.len()..].trim_start_matches(|c: char| c == ':' || c == '*' || c.is_whitespace() || c == '-').trim().to_string();
    if lower.starts_with("irrelevant") {
        (false, rest("irrelevant"))
    } else if lower.starts_with("not relevant") {
        (false, rest("not relevant"))
    } else if lower.starts_with("relevant") {
        (true, rest("relevant"))
    } else {
        (true, line.to_string())
    }
}

fn clip(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}

/// Ranks documents for `question`, asks the text evaluator about the top
/// ones and keeps those it does not reject, in rank order.
pub fn literature_search(ctx: &AgentCtx<'_>, question: &str) -> Result<Vec<RelevantDocument>, AgentError> {
    let res = ctx.res;
    if res.index.indexed_pmids().next().is_none() {
        return Err(AgentError::EmptyIndex);
    }
    let q = res.embedder.embed(question)?;
    let ranked = rank_documents(&res.index, &q, res.settings.chunk_pool)?;
    let mut out = Vec::new();
    for (pmid, score, hits) in ranked.into_iter().take(res.settings.top_docs) {
        let Some(doc) = res.docs.get(&pmid) else { continue };
        let passages: Vec<String> =
            hits.iter().take(res.settings.passages_per_doc).map(|h| clip(&h.chunk.text, PASSAGE_CHARS).to_string()).collect();
        let shown = hits
            .iter()
            .zip(&passages)
            .map(|(h, p)| format!("[{}] {p}", h.chunk.section.as_deref().unwrap_or("")))
            .collect::<Vec<_>>()
            .join("\n");
        let reply = ctx.ask(
            AgentName::TextEvaluator,
            "text_evaluator",
            &[
                ("question", question.to_string()),
                ("pmid", pmid.clone()),
                ("article_type", doc.article_type.as_str().to_string()),
                ("title", doc.title.clone()),
                ("passages", shown),
            ],
        )?;
        let (keep, rationale) = parse_verdict(&reply);
        if !keep {
            continue;
        }
        out.push(RelevantDocument {
            pmid: pmid.clone(),
            title: doc.title.clone(),
            article_type: doc.article_type,
            score,
            section: hits[0].chunk.section.clone().unwrap_or_default(),
            chunk: hits[0].chunk.source_id.clone(),
            passages,
            rationale,
        });
    }
    Ok(out)
}

pub const GROUPS: [(ArticleType, &str); 4] = [
    (ArticleType::OriginalContribution, "Original Research Articles"),
    (ArticleType::Review, "Review Articles"),
    (ArticleType::ClinicalCaseReport, "Clinical Case Reports"),
    (ArticleType::Other, "Other Documents"),
];

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

/// Fixed layout: counts, one section per article type (original work
/// first), then the reasoning agent's synthesis.
pub fn compose_answer(ctx: &AgentCtx<'_>, question: &str, docs: &[RelevantDocument]) -> Result<String, AgentError> {
    let mut s = String::from("[Performing Literature Retrieval]\n\n");
    if docs.is_empty() {
        s.push_str("No relevant documents were found in the corpus for this question.");
        return Ok(s);
    }
    let count = |t: ArticleType| docs.iter().filter(|d| d.article_type == t).count();
    let _ = writeln!(
        s,
        "Identified {}: {}, {}, {} and {}.",
        plural(docs.len(), "relevant publication", "relevant publications"),
        plural(count(ArticleType::OriginalContribution), "original research article", "original research articles"),
        plural(count(ArticleType::Review), "review article", "review articles"),
        plural(count(ArticleType::ClinicalCaseReport), "clinical case report", "clinical case reports"),
        plural(count(ArticleType::Other), "other document", "other documents"),
    );
    for (t, heading) in GROUPS {
        let group: Vec<&RelevantDocument> = docs.iter().filter(|d| d.article_type == t).collect();
        if group.is_empty() {
            continue;
        }
        let _ = write!(s, "\n{heading}\n\n");
        for d in group {
            let reason = if d.rationale.is_empty() { String::new() } else { format!(" {}", d.rationale) };
            let _ = writeln!(s, "- {} (PMID: {}).{reason}", d.title, d.pmid);
        }
    }
    let documents = docs
        .iter()
        .map(|d| format!("PMID {} ({}): {}\n{}", d.pmid, d.article_type.as_str(), d.title, d.passages.join("\n")))
        .collect::<Vec<_>>()
        .join("\n\n");
    let synthesis = ctx.ask(
        AgentName::Reasoning,
        "literature_answer",
        &[("question", question.to_string()), ("documents", documents)],
    )?;
    let _ = write!(s, "\nSynthesis of Evidence\n\n{synthesis}");
    Ok(s)
}
