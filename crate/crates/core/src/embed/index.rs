use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{chunk, cosine, tokenize, EmbedError, Embedder, TokenSpan, DEFAULT_DIM};
use crate::corpus::{DocumentSet, SectionClass};
use crate::graph::{KnowledgeGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkSource {
    KgNode,
    KgEdge,
    DocSection,
}

impl ChunkSource {
    pub(crate) fn tag(self) -> u8 {
        match self {
            ChunkSource::KgNode => 0,
            ChunkSource::KgEdge => 1,
            ChunkSource::DocSection => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ChunkSource::KgNode),
            1 => Some(ChunkSource::KgEdge),
            2 => Some(ChunkSource::DocSection),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chunk {
    pub source: ChunkSource,
    /// Node id, `head relation tail`, or `pmid#section#index`.
    pub source_id: String,
    pub span: TokenSpan,
    pub text: String,
    /// Graph nodes the chunk describes (one for a node, two for an edge).
    pub nodes: Vec<NodeId>,
    pub pmid: Option<String>,
    pub section: Option<String>,
    pub class: Option<SectionClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionWeights {
    #[serde(rename = "abstract")]
    pub abstract_: f64,
    pub results: f64,
    pub metadata: f64,
    pub other: f64,
}

impl Default for SectionWeights {
    fn default() -> Self {
        Self { abstract_: 0.7, results: 0.1, metadata: 0.1, other: 0.1 }
    }
}

impl SectionWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.abstract_, self.results, self.metadata, self.other]
    }

    pub fn get(&self, class: SectionClass) -> f64 {
        match class {
            SectionClass::Abstract => self.abstract_,
            SectionClass::Results => self.results,
            SectionClass::Metadata => self.metadata,
            SectionClass::Other => self.other,
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(EmbedError::Weights(w));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    pub kg_chunk: usize,
    pub article_chunk: usize,
    pub dim: usize,
    pub weights: SectionWeights,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self { kg_chunk: 20, article_chunk: 500, dim: DEFAULT_DIM, weights: SectionWeights::default() }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IndexSources<'a> {
    pub graph: Option<&'a KnowledgeGraph>,
    pub docs: Option<&'a DocumentSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a> {
    pub chunk: &'a Chunk,
    pub similarity: f64,
}

#[derive(Debug, Clone)]
struct Entry {
    chunk: Chunk,
    vector: Vec<f32>,
}

#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    d: usize,
    weights: SectionWeights,
    entries: Vec<Entry>,
    by_pmid: HashMap<String, Vec<usize>>,
}

fn window_chunks(
    out: &mut Vec<Chunk>,
    text: &str,
    size: usize,
    make: impl Fn(usize, TokenSpan, String) -> Chunk,
) -> Result<(), EmbedError> {
    let tokens = tokenize(text);
    for (i, span) in chunk(tokens.len(), size)?.into_iter().enumerate() {
        out.push(make(i, span, tokens[span.start..span.end].join(" ")));
    }
    Ok(())
}

/// The chunks an index over `sources` holds, in storage order: graph nodes,
/// distinct edge triples, then document sections by pmid.
pub(crate) fn plan_chunks(sources: IndexSources<'_>, cfg: &IndexConfig) -> Result<Vec<Chunk>, EmbedError> {
    let mut out = Vec::new();
    if let Some(g) = sources.graph {
        for node in g.nodes() {
            let text = match g.node_text(node) {
                Some(desc) if !desc.is_empty() => format!("{node} {desc}"),
                _ => node.to_string(),
            };
            window_chunks(&mut out, &text, cfg.kg_chunk, |_, span, text| Chunk {
                source: ChunkSource::KgNode,
                source_id: node.to_string(),
                span,
                text,
                nodes: vec![node.clone()],
                pmid: None,
                section: None,
                class: None,
            })?;
        }
        let triples: BTreeSet<(&NodeId, &str, &NodeId)> =
            g.edge_keys().map(|k| (&k.head, &*k.relation, &k.tail)).collect();
        for (h, r, t) in triples {
            let id = format!("{h} {r} {t}");
            window_chunks(&mut out, &id, cfg.kg_chunk, |_, span, text| Chunk {
                source: ChunkSource::KgEdge,
                source_id: id.clone(),
                span,
                text,
                nodes: vec![h.clone(), t.clone()],
                pmid: None,
                section: None,
                class: None,
            })?;
        }
    }
    if let Some(docs) = sources.docs {
        for doc in docs.iter() {
            for sec in doc.indexable_sections() {
                window_chunks(&mut out, sec.text, cfg.article_chunk, |i, span, text| Chunk {
                    source: ChunkSource::DocSection,
                    source_id: format!("{}#{}#{}", doc.pmid, sec.name, i),
                    span,
                    text,
                    nodes: Vec::new(),
                    pmid: Some(doc.pmid.clone()),
                    section: Some(sec.name.to_string()),
                    class: Some(sec.class),
                })?;
            }
        }
    }
    Ok(out)
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|x| *x as f32).collect()
}

impl EmbeddingIndex {
    pub fn new(d: usize, weights: SectionWeights) -> Result<Self, EmbedError> {
        weights.validate()?;
        Ok(Self { d, weights, entries: Vec::new(), by_pmid: HashMap::new() })
    }

    /// Chunks and embeds every source.
    pub fn build(sources: IndexSources<'_>, cfg: &IndexConfig, embedder: &dyn Embedder) -> Result<Self, EmbedError> {
        let mut index = Self::new(embedder.dim(), cfg.weights)?;
        for chunk in plan_chunks(sources, cfg)? {
            let v = embedder.embed(&chunk.text)?;
            index.insert(chunk, &v)?;
        }
        log::info!("embedding index: {} chunks, d={}", index.len(), index.d);
        Ok(index)
    }

    /// Vectors are stored at single precision.
    pub fn insert(&mut self, chunk: Chunk, vector: &[f64]) -> Result<(), EmbedError> {
        self.check_dim(vector)?;
        if let Some(p) = &chunk.pmid {
            self.by_pmid.entry(p.clone()).or_default().push(self.entries.len());
        }
        self.entries.push(Entry { chunk, vector: to_f32(vector) });
        Ok(())
    }

    pub(crate) fn insert_raw(&mut self, chunk: Chunk, vector: Vec<f32>) {
        if let Some(p) = &chunk.pmid {
            self.by_pmid.entry(p.clone()).or_default().push(self.entries.len());
        }
        self.entries.push(Entry { chunk, vector });
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> SectionWeights {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.entries.iter().map(|e| &e.chunk)
    }

    pub(crate) fn raw_entries(&self) -> impl Iterator<Item = (&Chunk, &[f32])> {
        self.entries.iter().map(|e| (&e.chunk, e.vector.as_slice()))
    }

    fn check_dim(&self, v: &[f64]) -> Result<(), EmbedError> {
        if v.len() != self.d {
            return Err(EmbedError::DimensionMismatch { expected: self.d, found: v.len() });
        }
        Ok(())
    }

    fn similarity(q: &[f64], stored: &[f32]) -> f64 {
        let s: Vec<f64> = stored.iter().map(|x| f64::from(*x)).collect();
        cosine(q, &s)
    }

    /// The query is rounded to the stored precision, so a query identical
    /// to an indexed vector scores exactly 1.
    fn quantize(&self, query: &[f64]) -> Result<Vec<f64>, EmbedError> {
        self.check_dim(query)?;
        Ok(query.iter().map(|x| f64::from(*x as f32)).collect())
    }

    /// Exact top-`top_n` by cosine, ties by source id then span.
    pub fn search(&self, query: &[f64], top_n: usize) -> Result<Vec<Hit<'_>>, EmbedError> {
        self.search_where(query, top_n, |_| true)
    }

    pub fn search_where(
        &self,
        query: &[f64],
        top_n: usize,
        keep: impl Fn(&Chunk) -> bool,
    ) -> Result<Vec<Hit<'_>>, EmbedError> {
        if top_n < 1 {
            return Err(EmbedError::TopN);
        }
        let q = self.quantize(query)?;
        let mut hits: Vec<Hit<'_>> = self
            .entries
            .iter()
            .filter(|e| keep(&e.chunk))
            .map(|e| Hit { chunk: &e.chunk, similarity: Self::similarity(&q, &e.vector) })
            .collect();
        hits.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.chunk.source_id.cmp(&b.chunk.source_id))
                .then_with(|| a.chunk.span.cmp(&b.chunk.span))
                .then_with(|| a.chunk.source.cmp(&b.chunk.source))
        });
        hits.truncate(top_n);
        Ok(hits)
    }

    /// Per-class maximum chunk similarity for one document, in
    /// `SectionClass::ALL` order; classes without chunks score 0.
    pub fn class_scores(&self, query: &[f64], pmid: &str) -> Result<[f64; 4], EmbedError> {
        let q = self.quantize(query)?;
        let idx = self.by_pmid.get(pmid).ok_or_else(|| EmbedError::DocumentNotIndexed(pmid.to_string()))?;
        let mut best = [None::<f64>; 4];
        for &i in idx {
            let e = &self.entries[i];
            let Some(class) = e.chunk.class else { continue };
            let slot = &mut best[SectionClass::ALL.iter().position(|c| *c == class).unwrap()];
            let s = Self::similarity(&q, &e.vector);
            *slot = Some(slot.map_or(s, |b: f64| b.max(s)));
        }
        Ok(best.map(|b| b.unwrap_or(0.0)))
    }

    /// Weighted sum of the per-class scores.
    pub fn score_document(&self, query: &[f64], pmid: &str) -> Result<f64, EmbedError> {
        let s = self.class_scores(query, pmid)?;
        Ok(weighted(&self.weights, &s))
    }

    pub fn indexed_pmids(&self) -> impl Iterator<Item = &str> {
        self.by_pmid.keys().map(String::as_str)
    }
}

pub(crate) fn weighted(w: &SectionWeights, s: &[f64; 4]) -> f64 {
    w.as_array().iter().zip(s).map(|(w, s)| w * s).sum()
}
