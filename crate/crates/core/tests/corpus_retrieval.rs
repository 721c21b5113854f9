use std::path::{Path, PathBuf};

use hypograph_core::corpus::{hierarchical_summarize, load_corpus, parse_corpus, ArticleType, SectionClass};
use hypograph_core::embed::{cosine, EmbeddingIndex, Embedder, IndexConfig, IndexSources, ReferenceEmbedder};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn citation_fixture_loads() {
    let (docs, stats) = load_corpus(&fixture("corpus.json")).unwrap();
    assert_eq!(stats.records, 4);
    assert_eq!((stats.missing_pmid, stats.duplicate_pmid), (0, 0));
    let pmids: Vec<&str> = docs.iter().map(|d| d.pmid.as_str()).collect();
    assert_eq!(pmids, ["1625993", "19567656", "387170", "9106603"]);
    let c = docs.stats();
    assert_eq!((c.pmids, c.original_contributions, c.case_reports, c.review_articles), (4, 2, 2, 0));
    assert_eq!(docs.get("9106603").unwrap().article_type, ArticleType::ClinicalCaseReport);
    assert_eq!(docs.get("1625993").unwrap().article_type, ArticleType::OriginalContribution);

    let d = docs.get("387170").unwrap();
    let names: Vec<&str> = d.sections.keys().map(String::as_str).collect();
    assert_eq!(names, ["Abstract", "Methods", "Results", "Discussion"]);
    let classes: Vec<SectionClass> = d.indexable_sections().iter().map(|s| s.class).collect();
    assert_eq!(classes[0], SectionClass::Metadata);
    assert!(classes.contains(&SectionClass::Abstract) && classes.contains(&SectionClass::Results));
}

#[test]
fn record_order_does_not_matter() {
    let text = std::fs::read_to_string(fixture("corpus.json")).unwrap();
    let records: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    let reversed: Vec<&serde_json::Value> = records.iter().rev().collect();
    let (a, _) = parse_corpus(&text).unwrap();
    let (b, _) = parse_corpus(&serde_json::to_string(&reversed).unwrap()).unwrap();
    let jsonl: String = records.iter().map(|r| format!("{r}\n")).collect();
    let (c, _) = parse_corpus(&jsonl).unwrap();
    for other in [&b, &c] {
        assert_eq!(a.len(), other.len());
        for (x, y) in a.iter().zip(other.iter()) {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn long_fixture_document_is_summarized() {
    let (docs, _) = load_corpus(&fixture("corpus.json")).unwrap();
    let d = docs.get("1625993").unwrap();
    let first_ten = |t: &str| -> Result<String, String> { Ok(t.split_whitespace().take(10).collect::<Vec<_>>().join(" ")) };
    let s = hierarchical_summarize(d, &first_ten, 60).unwrap();
    assert_eq!(s.passes, 1);
    assert!(!s.truncated);
    assert!(s.text.split_whitespace().count() <= 60);
    let same = hierarchical_summarize(d, &first_ten, 10_000).unwrap();
    assert_eq!(same.passes, 0);
    assert_eq!(same.text, d.full_text());
}

fn retrieval_index() -> (hypograph_core::corpus::DocumentSet, EmbeddingIndex) {
    let (docs, _) = load_corpus(&fixture("retrieval_docs.json")).unwrap();
    let cfg = IndexConfig::default();
    let index = EmbeddingIndex::build(IndexSources { graph: None, docs: Some(&docs) }, &cfg, &ReferenceEmbedder::default()).unwrap();
    (docs, index)
}

#[test]
fn abstract_match_outranks_methods_match() {
    let (_, index) = retrieval_index();
    let q = ReferenceEmbedder::default().embed("atenolol suppresses exercise induced ventricular arrhythmia").unwrap();
    let a = index.score_document(&q, "100001").unwrap();
    let m = index.score_document(&q, "100002").unwrap();
    assert!(a > m, "{a} vs {m}");
    let sa = index.class_scores(&q, "100001").unwrap();
    assert!((sa[0] - 1.0).abs() < 1e-6);
    assert!((a - (0.7 * sa[0] + 0.1 * (sa[1] + sa[2] + sa[3]))).abs() < 1e-12);

    let hits = index.search(&q, 2).unwrap();
    assert_eq!(hits[0].chunk.source_id, "100001#Abstract#0");
    assert_eq!(hits[1].chunk.source_id, "100002#Methods#0");
    let ranked: Vec<(f64, &str)> = ["100001", "100002", "100003", "100004"]
        .iter()
        .map(|p| (index.score_document(&q, p).unwrap(), *p))
        .collect();
    assert!(ranked.iter().all(|(s, p)| *p == "100001" || *s < a));
}

#[test]
fn persisted_fixture_index_searches_identically() {
    let (docs, index) = retrieval_index();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("docs.rgix");
    index.save(&path).unwrap();
    let loaded =
        EmbeddingIndex::load(&path, IndexSources { graph: None, docs: Some(&docs) }, &IndexConfig::default()).unwrap();
    let e = ReferenceEmbedder::default();
    for q in ["sertraline muscle", "kidney creatinine", "treadmill rhythm"] {
        let v = e.embed(q).unwrap();
        let a: Vec<(String, f64)> = index.search(&v, 5).unwrap().iter().map(|h| (h.chunk.source_id.clone(), h.similarity)).collect();
        let b: Vec<(String, f64)> = loaded.search(&v, 5).unwrap().iter().map(|h| (h.chunk.source_id.clone(), h.similarity)).collect();
        assert_eq!(a, b);
    }
    assert!(cosine(&e.embed("alpha beta").unwrap(), &e.embed("beta alpha").unwrap()) == 1.0);
}
