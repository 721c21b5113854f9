//! Publication corpus: loading, section classes and hierarchical
//! summarization.
//!
//! Records are JSON objects, given either as one array or as JSON lines:
//!
//! ```json
//! {"pmid": "387170", "title": "...", "article_type": "original_contribution",
//!  "sections": {"Abstract": "...", "Methods": "..."},
//!  "metadata": {"journal": "...", "year": "1979", "mesh_terms": "..."},
//!  "publication_types": ["Journal Article"]}
//! ```
//!
//! `pmid` may be a string or a number. `article_type` is optional; without
//! it the type is inferred from `publication_types` or from a
//! `publication_type` metadata entry.

mod summarize;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

pub use summarize::{
    hierarchical_summarize, summarize_sections, Summarizer, Summary, DEFAULT_SUMMARY_THRESHOLD, MAX_SUMMARY_PASSES,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a JSON array or JSON-lines stream ({message})")]
    Parse { path: PathBuf, message: String },
    #[error("summarizer failed on section '{section}': {message}")]
    Summarizer { section: String, message: String },
    #[error("summary threshold must be positive")]
    ZeroThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticleType {
    OriginalContribution,
    Review,
    ClinicalCaseReport,
    Other,
}

impl ArticleType {
    pub fn as_str(self) -> &'static str {
        match self {
            ArticleType::OriginalContribution => "original_contribution",
            ArticleType::Review => "review",
            ArticleType::ClinicalCaseReport => "clinical_case_report",
            ArticleType::Other => "other",
        }
    }

    /// Accepts the canonical names plus PubMed publication-type strings.
    pub fn from_label(label: &str) -> Option<Self> {
        let l = label.trim().to_lowercase().replace([' ', '-'], "_");
        match l.as_str() {
            "original_contribution" | "original" | "journal_article" | "research_article" => {
                Some(ArticleType::OriginalContribution)
            }
            "review" | "review_article" | "systematic_review" => Some(ArticleType::Review),
            "clinical_case_report" | "case_report" | "case_reports" => Some(ArticleType::ClinicalCaseReport),
            "other" => Some(ArticleType::Other),
            _ => None,
        }
    }

    /// Inference from publication-type strings; review and case-report
    /// markers take precedence over the generic journal-article marker.
    pub fn infer(publication_types: &[String]) -> Self {
        let has = |needle: &str| publication_types.iter().any(|p| p.to_lowercase().contains(needle));
        if has("review") {
            ArticleType::Review
        } else if has("case report") {
            ArticleType::ClinicalCaseReport
        } else if has("journal article") {
            ArticleType::OriginalContribution
        } else {
            ArticleType::Other
        }
    }
}

impl fmt::Display for ArticleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionClass {
    Abstract,
    Results,
    Metadata,
    Other,
}

impl SectionClass {
    pub const ALL: [SectionClass; 4] = [
        SectionClass::Abstract,
        SectionClass::Results,
        SectionClass::Metadata,
        SectionClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SectionClass::Abstract => "abstract",
            SectionClass::Results => "results",
            SectionClass::Metadata => "metadata",
            SectionClass::Other => "other",
        }
    }
}

const METADATA_NAMES: [&str; 5] = ["title", "authors", "journal", "keywords", "mesh"];

/// Total, case-insensitive section classifier.
pub fn classify_section(section_name: &str) -> SectionClass {
    let name = section_name.trim().to_lowercase();
    if name.contains("abstract") {
        SectionClass::Abstract
    } else if name.contains("result") {
        SectionClass::Results
    } else if METADATA_NAMES.contains(&name.as_str()) || name.starts_with("mesh") {
        SectionClass::Metadata
    } else {
        SectionClass::Other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub pmid: String,
    pub title: String,
    pub article_type: ArticleType,
    pub sections: IndexMap<String, String>,
    pub metadata: BTreeMap<String, String>,
}

/// One piece of indexable document text.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionText<'a> {
    pub name: &'a str,
    pub text: &'a str,
    pub class: SectionClass,
}

impl Document {
    /// Body sections joined by blank lines, without their names.
    pub fn full_text(&self) -> String {
        self.sections.values().map(String::as_str).collect::<Vec<_>>().join("\n\n")
    }

    /// Title, metadata entries and body sections with their classes. Title
    /// and metadata entries always count as metadata.
    pub fn indexable_sections(&self) -> Vec<SectionText<'_>> {
        let mut out = Vec::new();
        if !self.title.is_empty() {
            out.push(SectionText { name: "title", text: &self.title, class: SectionClass::Metadata });
        }
        for (k, v) in &self.metadata {
            out.push(SectionText { name: k, text: v, class: SectionClass::Metadata });
        }
        for (k, v) in &self.sections {
            out.push(SectionText { name: k, text: v, class: classify_section(k) });
        }
        out
    }

    pub fn section_text(&self, name: &str) -> Option<&str> {
        if name == "title" {
            return Some(&self.title);
        }
        self.sections.get(name).or_else(|| self.metadata.get(name)).map(String::as_str)
    }

    pub fn abstract_text(&self) -> Option<&str> {
        self.sections
            .iter()
            .find(|(k, _)| classify_section(k) == SectionClass::Abstract)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub records: usize,
    pub missing_pmid: usize,
    pub duplicate_pmid: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentSet {
    docs: BTreeMap<String, Document>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub pmids: usize,
    pub original_contributions: usize,
    pub review_articles: usize,
    pub case_reports: usize,
    pub other: usize,
}

impl DocumentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false`, leaving the set unchanged, if the pmid is taken.
    pub fn insert(&mut self, doc: Document) -> bool {
        if self.docs.contains_key(&doc.pmid) {
            return false;
        }
        self.docs.insert(doc.pmid.clone(), doc);
        true
    }

    pub fn get(&self, pmid: &str) -> Option<&Document> {
        self.docs.get(pmid)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Documents in pmid order.
    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut s = CorpusStats { pmids: self.docs.len(), ..Default::default() };
        for d in self.docs.values() {
            match d.article_type {
                ArticleType::OriginalContribution => s.original_contributions += 1,
                ArticleType::Review => s.review_articles += 1,
                ArticleType::ClinicalCaseReport => s.case_reports += 1,
                ArticleType::Other => s.other += 1,
            }
        }
        s
    }
}

pub fn load_corpus(path: &Path) -> Result<(DocumentSet, LoadStats), CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_corpus(&text).map_err(|message| CorpusError::Parse { path: path.to_path_buf(), message })
}

/// Same as [`load_corpus`] on in-memory text.
pub fn parse_corpus(text: &str) -> Result<(DocumentSet, LoadStats), String> {
    let records: Vec<Json> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| e.to_string())?
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?
    };
    let mut set = DocumentSet::new();
    let mut stats = LoadStats { records: records.len(), ..Default::default() };
    for rec in &records {
        match document_from_json(rec) {
            None => stats.missing_pmid += 1,
            Some(doc) => {
                if !set.insert(doc) {
                    stats.duplicate_pmid += 1;
                }
            }
        }
    }
    if stats.missing_pmid + stats.duplicate_pmid > 0 {
        log::warn!(
            "corpus: skipped {} records without pmid and {} duplicate pmids",
            stats.missing_pmid,
            stats.duplicate_pmid
        );
    }
    Ok((set, stats))
}

fn scalar_text(v: &Json) -> Option<String> {
    match v {
        Json::String(s) => Some(s.clone()),
        Json::Number(n) => Some(n.to_string()),
        Json::Bool(b) => Some(b.to_string()),
        Json::Array(items) => {
            let parts: Vec<String> = items.iter().filter_map(scalar_text).collect();
            Some(parts.join("; "))
        }
        _ => None,
    }
}

fn document_from_json(rec: &Json) -> Option<Document> {
    let obj = rec.as_object()?;
    let pmid = obj.get("pmid").and_then(|p| match p {
        Json::String(s) => Some(s.trim().to_string()),
        Json::Number(n) => Some(n.to_string()),
        _ => None,
    })?;
    if pmid.is_empty() {
        return None;
    }
    let title = obj.get("title").and_then(scalar_text).unwrap_or_default();
    let mut sections = IndexMap::new();
    if let Some(Json::Object(map)) = obj.get("sections") {
        for (k, v) in map {
            if let Some(t) = scalar_text(v) {
                sections.insert(k.clone(), t);
            }
        }
    }
    let mut metadata = BTreeMap::new();
    if let Some(Json::Object(map)) = obj.get("metadata") {
        for (k, v) in map {
            if let Some(t) = scalar_text(v) {
                metadata.insert(k.clone(), t);
            }
        }
    }
    let mut pub_types: Vec<String> = Vec::new();
    if let Some(Json::Array(items)) = obj.get("publication_types") {
        pub_types.extend(items.iter().filter_map(scalar_text));
    }
    for key in ["publication_type", "publication_types"] {
        if let Some(v) = metadata.get(key) {
            pub_types.extend(v.split([';', ',']).map(|s| s.trim().to_string()));
        }
    }
    let article_type = obj
        .get("article_type")
        .and_then(Json::as_str)
        .and_then(ArticleType::from_label)
        .unwrap_or_else(|| ArticleType::infer(&pub_types));
    Some(Document { pmid, title, article_type, sections, metadata })
}
