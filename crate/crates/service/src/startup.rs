//! Loads everything a session needs from an [`AppConfig`].

use std::path::PathBuf;
use std::sync::Arc;

use hypograph_core::corpus::load_corpus;
use hypograph_core::embed::{Embedder, EmbeddingIndex, IndexSources, ReferenceEmbedder};
use hypograph_core::graph::{load_edge_list, load_node_text, merge_graphs, KnowledgeGraph, Provenance};
use hypograph_core::linkpred::LinkModel;

use crate::agents::{Lexicon, Resources};
use crate::config::{AppConfig, EmbedderKind};
use crate::gateway::{AgentName, Gateway, HttpEmbedder, Transport};
use crate::prompts::PromptSet;

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("missing input file: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    Missing(Vec<PathBuf>),
    #[error("{0}")]
    Load(String),
}

fn load_err(what: &str, e: impl std::fmt::Display) -> StartupError {
    StartupError::Load(format!("{what}: {e}"))
}

/// Knowledge graph plus optional text-mining edges and node text.
pub fn load_graph(cfg: &AppConfig) -> Result<KnowledgeGraph, StartupError> {
    let (mut graph, report) = load_edge_list(&cfg.knowledge_graph, Provenance::KnowledgeBase, '\t')
        .map_err(|e| load_err(&cfg.knowledge_graph.display().to_string(), e))?;
    log::info!("knowledge graph: {report:?}");
    if let Some(tm) = &cfg.text_mining {
        let (overlay, _) =
            load_edge_list(tm, Provenance::TextMining, '\t').map_err(|e| load_err(&tm.display().to_string(), e))?;
        graph = merge_graphs(&graph, &overlay).map_err(|e| load_err("merge", e))?;
    }
    if let Some(nt) = &cfg.node_text {
        load_node_text(&mut graph, nt).map_err(|e| load_err(&nt.display().to_string(), e))?;
    }
    Ok(graph)
}

pub fn build_embedder(cfg: &AppConfig, transport: Arc<dyn Transport>) -> Result<Box<dyn Embedder>, StartupError> {
    let dim = cfg.index_config.dim;
    Ok(match cfg.embedder.kind {
        EmbedderKind::Reference => Box::new(ReferenceEmbedder::new(dim).map_err(|e| load_err("embedder", e))?),
        EmbedderKind::OpenaiCompatible => Box::new(
            HttpEmbedder::new(
                transport,
                cfg.embedder.endpoint.as_deref(),
                &cfg.embedder.model,
                cfg.embedder.key_file.as_deref(),
                dim,
            )
            .map_err(|e| load_err("embedder", e))?,
        ),
    })
}

/// Checks inputs, then loads graph, corpus, index, checkpoint, agents and
/// prompts. A missing checkpoint is not fatal: `predict` reports it.
pub fn load_resources(cfg: &AppConfig, transport: Arc<dyn Transport>) -> Result<Resources, StartupError> {
    let missing = cfg.missing_inputs();
    if !missing.is_empty() {
        return Err(StartupError::Missing(missing));
    }
    let graph = load_graph(cfg)?;
    let (docs, stats) = load_corpus(&cfg.corpus).map_err(|e| load_err(&cfg.corpus.display().to_string(), e))?;
    log::info!("corpus: {stats:?}");
    let embedder = build_embedder(cfg, transport.clone())?;
    let sources = IndexSources { graph: Some(&graph), docs: Some(&docs) };
    let cached = cfg.index.as_ref().filter(|p| p.is_file()).and_then(|p| {
        match EmbeddingIndex::load(p, sources, &cfg.index_config) {
            Ok(ix) if ix.dim() == embedder.dim() => Some(ix),
            Ok(_) => {
                log::warn!("index {} has a different dimension; rebuilding", p.display());
                None
            }
            Err(e) => {
                log::warn!("index {} unusable ({e}); rebuilding", p.display());
                None
            }
        }
    });
    let index = match cached {
        Some(ix) => ix,
        None => {
            let ix = EmbeddingIndex::build(sources, &cfg.index_config, embedder.as_ref()).map_err(|e| load_err("index", e))?;
            if let Some(p) = &cfg.index {
                if let Some(dir) = p.parent() {
                    std::fs::create_dir_all(dir).map_err(|e| load_err(&dir.display().to_string(), e))?;
                }
                ix.save(p).map_err(|e| load_err(&p.display().to_string(), e))?;
            }
            ix
        }
    };
    let model = if cfg.model.is_file() {
        Some(LinkModel::load(&cfg.model).map_err(|e| load_err(&cfg.model.display().to_string(), e))?)
    } else {
        log::warn!("no link prediction checkpoint at {}; predict is unavailable", cfg.model.display());
        None
    };
    let agents = Gateway::load_config(&cfg.agents).map_err(|e| load_err(&cfg.agents.display().to_string(), e))?;
    for a in AgentName::ALL {
        if !agents.contains_key(&a) {
            log::warn!("agent {a} is not configured");
        }
    }
    let prompts = match &cfg.prompts {
        Some(p) => PromptSet::load(p).map_err(|e| load_err(&p.display().to_string(), e))?,
        None => PromptSet::default(),
    };
    Ok(Resources {
        lexicon: Lexicon::build(&graph),
        graph,
        docs,
        index,
        embedder,
        model,
        model_path: cfg.model.clone(),
        gateway: Gateway::new(agents, transport),
        prompts,
        settings: cfg.settings.clone(),
        explain: cfg.explain.clone(),
        summary_dir: cfg.summary_dir.clone(),
        explanation_dir: cfg.explanation_dir.clone(),
    })
}
