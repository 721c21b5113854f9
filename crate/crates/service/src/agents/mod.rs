//! Retrieval and reasoning pipelines behind the four session commands.

pub mod cypher_agent;
pub mod entities;
pub mod interpret;
pub mod literature;
pub mod predict;
pub mod summary;

use std::path::PathBuf;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hypograph_core::corpus::{ArticleType, DocumentSet};
use hypograph_core::cypher::Value;
use hypograph_core::embed::{EmbedError, Embedder, EmbeddingIndex};
use hypograph_core::explain::{ExplainConfig, ExplainError, Explanation};
use hypograph_core::graph::{KnowledgeGraph, NodeId};
use hypograph_core::linkpred::{LinkModel, LinkPredError};

use crate::config::AgentSettings;
use crate::gateway::{AgentName, ChatMessage, ExchangeSink, Gateway, GatewayError};
use crate::prompts::{PromptError, PromptSet};

pub use cypher_agent::{generate_verified_cypher, schema_summary, CypherAttempt, VerifiedQuery};
pub use entities::{link_entities, EntityMatch, Lexicon, MatchMethod};
pub use interpret::interpret_prediction;
pub use literature::{literature_search, RelevantDocument};
pub use summary::summarize_session;

/// Shared, read-only state for every session.
pub struct Resources {
    pub graph: KnowledgeGraph,
    pub lexicon: Lexicon,
    pub docs: DocumentSet,
    pub index: EmbeddingIndex,
    pub embedder: Box<dyn Embedder>,
    pub model: Option<LinkModel>,
    pub model_path: PathBuf,
    pub gateway: Gateway,
    pub prompts: PromptSet,
    pub settings: AgentSettings,
    pub explain: ExplainConfig,
    pub summary_dir: PathBuf,
    pub explanation_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("no executable Cypher query after {} attempts: {}", attempts.len(), summarize_attempts(attempts))]
    Verification { attempts: Vec<CypherAttempt> },
    #[error(
        "no link prediction checkpoint at {0}; train one with `hypograph train --config <config>` \
         or point the `model` config entry at an existing checkpoint"
    )]
    NoModel(PathBuf),
    #[error("the document index is empty")]
    EmptyIndex,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    LinkPred(#[from] LinkPredError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("{0}")]
    Io(String),
}

fn summarize_attempts(attempts: &[CypherAttempt]) -> String {
    attempts
        .iter()
        .enumerate()
        .map(|(i, a)| format!("[{}] {}", i + 1, a.diagnostics.as_deref().unwrap_or("ran")))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub agent: AgentName,
    pub input_sha256: String,
    pub output_sha256: String,
}

/// One turn's view of the shared resources: agent calls go through here so
/// that each is logged and traced.
pub struct AgentCtx<'a> {
    pub res: &'a Resources,
    sink: &'a dyn ExchangeSink,
    trace: Mutex<Vec<TraceEntry>>,
}

impl<'a> AgentCtx<'a> {
    pub fn new(res: &'a Resources, sink: &'a dyn ExchangeSink) -> Self {
        Self { res, sink, trace: Mutex::new(Vec::new()) }
    }

    /// Renders `template` and sends it to `agent` as a single user message.
    pub fn ask(&self, agent: AgentName, template: &str, bindings: &[(&str, String)]) -> Result<String, AgentError> {
        let prompt = self.res.prompts.render(template, bindings)?;
        let out = self.res.gateway.complete(agent, &[ChatMessage::user(prompt.clone())], self.sink)?;
        self.trace.lock().unwrap().push(TraceEntry {
            agent,
            input_sha256: sha256_hex(&prompt),
            output_sha256: sha256_hex(&out),
        });
        Ok(out)
    }

    pub fn into_trace(self) -> Vec<TraceEntry> {
        self.trace.into_inner().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Query,
    Predict,
    Search,
    Summarize,
    Chat,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Query => "query",
            Command::Predict => "predict",
            Command::Search => "search",
            Command::Summarize => "summarize",
            Command::Chat => "chat",
        }
    }
}

fn strip_quotes(s: &str) -> &str {
    for (open, close) in [('"', '"'), ('\'', '\''), ('\u{201c}', '\u{201d}')] {
        if s.len() >= open.len_utf8() + close.len_utf8() && s.starts_with(open) && s.ends_with(close) {
            return s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s
}

/// Splits a user line into its command keyword and payload.
pub fn route(user_input: &str) -> Result<(Command, String), AgentError> {
    let line = user_input.trim();
    let (first, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let command = match first.to_lowercase().as_str() {
        "query" => Command::Query,
        "predict" => Command::Predict,
        "search" => Command::Search,
        "summarize" => Command::Summarize,
        _ => return Ok((Command::Chat, line.to_string())),
    };
    let payload = strip_quotes(rest.trim()).to_string();
    if payload.is_empty() && command != Command::Summarize {
        return Err(AgentError::Usage(format!("usage: {} <request>", command.as_str())));
    }
    Ok((command, payload))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEdge {
    pub head: NodeId,
    pub tail: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Cypher {
        query: String,
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
    Citation {
        pmid: String,
        title: String,
        article_type: ArticleType,
        /// Section and chunk id of the best matching passage.
        section: String,
        chunk: String,
        score: f64,
        rationale: String,
    },
    Prediction {
        prediction_id: String,
        head: NodeId,
        tail: NodeId,
        probability: f64,
        rank: usize,
        top_edges: Vec<ScoredEdge>,
        /// File names inside the explanation directory.
        tsv_file: String,
        dot_file: String,
    },
    Summary {
        file: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentResponse {
    pub command: Command,
    pub answer_text: String,
    pub evidence: Vec<Evidence>,
    pub agent_trace: Vec<TraceEntry>,
}

/// What a command produced besides the reply itself.
#[derive(Debug, Default)]
pub struct TurnArtifacts {
    pub explanations: Vec<(String, Explanation)>,
}

/// Session context a turn may need.
pub struct SessionView<'a> {
    pub session_id: &'a str,
    pub now: DateTime<Utc>,
    /// Earlier turns as (user input, answer text).
    pub transcript: &'a [(String, String)],
}

/// Routes and runs one user line.
pub fn respond(
    res: &Resources,
    sink: &dyn ExchangeSink,
    user_input: &str,
    session: &SessionView<'_>,
) -> Result<(AgentResponse, TurnArtifacts), AgentError> {
    let (command, payload) = route(user_input)?;
    let ctx = AgentCtx::new(res, sink);
    let mut artifacts = TurnArtifacts::default();
    let (answer_text, evidence) = match command {
        Command::Query => answer_query(&ctx, &payload)?,
        Command::Search => answer_search(&ctx, &payload)?,
        Command::Predict => {
            let out = predict::predict(&ctx, &payload)?;
            artifacts.explanations = out.explanations;
            (out.answer_text, out.evidence)
        }
        Command::Summarize => {
            let (text, file) = summarize_session(&ctx, session.session_id, session.now, session.transcript)?;
            let name = file.file_name().map_or_else(|| file.display().to_string(), |n| n.to_string_lossy().into_owned());
            (format!("[Summarizing session]\n\n{text}"), vec![Evidence::Summary { file: name }])
        }
        Command::Chat => (ctx.ask(AgentName::Reasoning, "reasoning", &[("question", payload)])?, Vec::new()),
    };
    let response = AgentResponse { command, answer_text, evidence, agent_trace: ctx.into_trace() };
    Ok((response, artifacts))
}

fn answer_query(ctx: &AgentCtx<'_>, question: &str) -> Result<(String, Vec<Evidence>), AgentError> {
    let res = ctx.res;
    let entities = link_entities(question, &res.graph, &res.lexicon, &res.index, res.embedder.as_ref(), &res.settings)?;
    let verified = generate_verified_cypher(ctx, question, &entities, res.settings.max_attempts)?;
    let mut shown = verified.table.clone();
    let total = shown.rows.len();
    shown.rows.truncate(res.settings.table_rows);
    let mut table = shown.to_tsv();
    if total > shown.rows.len() {
        table.push_str(&format!("... {} more rows\n", total - shown.rows.len()));
    }
    let prose = ctx.ask(AgentName::Reasoning, "query_answer", &[("question", question.to_string()), ("table", table)])?;
    let evidence = Evidence::Cypher {
        query: verified.query,
        columns: verified.table.columns,
        rows: verified.table.rows,
    };
    Ok((format!("[Querying knowledge graph]\n\n{prose}"), vec![evidence]))
}

fn answer_search(ctx: &AgentCtx<'_>, question: &str) -> Result<(String, Vec<Evidence>), AgentError> {
    let docs = literature_search(ctx, question)?;
    let text = literature::compose_answer(ctx, question, &docs)?;
    let evidence = docs
        .iter()
        .map(|d| Evidence::Citation {
            pmid: d.pmid.clone(),
            title: d.title.clone(),
            article_type: d.article_type,
            section: d.section.clone(),
            chunk: d.chunk.clone(),
            score: d.score,
            rationale: d.rationale.clone(),
        })
        .collect();
    Ok((text, evidence))
}
