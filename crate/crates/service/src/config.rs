//! Service configuration file. Relative paths are resolved against the
//! directory holding the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hypograph_core::embed::IndexConfig;
use hypograph_core::explain::ExplainConfig;
use hypograph_core::linkpred::TrainConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    /// Hashed bag-of-tokens embedder; needs no network.
    #[default]
    Reference,
    /// POST {endpoint}/embeddings in the OpenAI shape.
    OpenaiCompatible,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub kind: EmbedderKind,
    pub model: String,
    pub endpoint: Option<String>,
    pub key_file: Option<PathBuf>,
}

/// Knobs for the agent pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSettings {
    /// Minimum cosine similarity for a vector entity match.
    pub link_threshold: f64,
    /// Node chunks considered by vector entity linking.
    pub link_candidates: usize,
    pub max_attempts: usize,
    /// Document chunks retrieved before per-document scoring.
    pub chunk_pool: usize,
    pub top_docs: usize,
    /// Passages per document shown to the text evaluator.
    pub passages_per_doc: usize,
    pub top_predictions: usize,
    pub top_k: usize,
    /// Token budget above which a transcript is condensed section-wise
    /// before the final summary.
    pub summary_budget: usize,
    /// Result rows shown to the answering agent.
    pub table_rows: usize,
}

impl Default for AgentSettings {
    fn default() -> Self {
        Self {
            link_threshold: 0.35,
            link_candidates: 10,
            max_attempts: 3,
            chunk_pool: 50,
            top_docs: 4,
            passages_per_doc: 3,
            top_predictions: 5,
            top_k: 10,
            summary_budget: 500,
            table_rows: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub knowledge_graph: PathBuf,
    pub text_mining: Option<PathBuf>,
    pub node_text: Option<PathBuf>,
    pub corpus: PathBuf,
    /// Persisted embedding index; built and written when absent or stale.
    pub index: Option<PathBuf>,
    /// Link prediction checkpoint.
    pub model: PathBuf,
    pub agents: PathBuf,
    pub prompts: Option<PathBuf>,
    pub embedder: EmbedderConfig,
    pub index_config: IndexConfig,
    pub explain: ExplainConfig,
    pub settings: AgentSettings,
    /// Used by `hypograph train`.
    pub train: TrainConfig,
    pub summary_dir: PathBuf,
    pub explanation_dir: PathBuf,
    pub log_dir: PathBuf,
    pub port: u16,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            knowledge_graph: "data/knowledge_graph/kg.tsv".into(),
            text_mining: None,
            node_text: None,
            corpus: "data/text_corpus/corpus.json".into(),
            index: None,
            model: "data/predictions/model.rglm".into(),
            agents: "config/llm_agents.json".into(),
            prompts: None,
            embedder: EmbedderConfig::default(),
            index_config: IndexConfig::default(),
            explain: ExplainConfig::default(),
            settings: AgentSettings::default(),
            train: TrainConfig::default(),
            summary_dir: ".".into(),
            explanation_dir: "explanations".into(),
            log_dir: "log".into(),
            port: 8080,
        }
    }
}

impl AppConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg: AppConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse { path: base.to_path_buf(), message: e.to_string() })?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.knowledge_graph);
        fix(&mut self.corpus);
        fix(&mut self.model);
        fix(&mut self.agents);
        fix(&mut self.summary_dir);
        fix(&mut self.explanation_dir);
        fix(&mut self.log_dir);
        for p in [&mut self.text_mining, &mut self.node_text, &mut self.index, &mut self.prompts, &mut self.embedder.key_file]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.settings;
        if !(0.0..=1.0).contains(&s.link_threshold) {
            return Err(ConfigError::Invalid(format!("link_threshold {} outside [0, 1]", s.link_threshold)));
        }
        for (name, v) in [
            ("max_attempts", s.max_attempts),
            ("chunk_pool", s.chunk_pool),
            ("top_docs", s.top_docs),
            ("top_predictions", s.top_predictions),
            ("summary_budget", s.summary_budget),
            ("link_candidates", s.link_candidates),
        ] {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be at least 1")));
            }
        }
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.index_config.weights.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Input files that must exist before a session can start.
    pub fn required_inputs(&self) -> Vec<&Path> {
        let mut out = vec![self.knowledge_graph.as_path(), self.corpus.as_path(), self.agents.as_path()];
        out.extend(self.text_mining.as_deref());
        out.extend(self.node_text.as_deref());
        out.extend(self.prompts.as_deref());
        out
    }

    pub fn missing_inputs(&self) -> Vec<PathBuf> {
        self.required_inputs().into_iter().filter(|p| !p.is_file()).map(Path::to_path_buf).collect()
    }
}
