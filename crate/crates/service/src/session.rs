//! Sessions, their JSON-lines logs and the terminal loop.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hypograph_core::explain::Explanation;

use crate::agents::summary::file_timestamp;
use crate::agents::{respond, sha256_hex, AgentError, AgentResponse, Evidence, Resources, SessionView};
use crate::gateway::{Exchange, ExchangeSink, GatewayError};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at a fixed instant and advances by `step` on every reading.
pub struct StepClock {
    next: Mutex<DateTime<Utc>>,
    step: chrono::Duration,
}

impl StepClock {
    pub fn new(start: DateTime<Utc>, step: chrono::Duration) -> Self {
        Self { next: Mutex::new(start), step }
    }
}

impl Clock for StepClock {
    fn now(&self) -> DateTime<Utc> {
        let mut n = self.next.lock().unwrap();
        let t = *n;
        *n = t + self.step;
        t
    }
}

pub trait IdGenerator: Send + Sync {
    fn next_id(&self) -> String;
}

pub struct UuidIds;

impl IdGenerator for UuidIds {
    fn next_id(&self) -> String {
        uuid::Uuid::new_v4().simple().to_string()
    }
}

/// `prefix1`, `prefix2`, ...
pub struct SequentialIds {
    prefix: String,
    counter: AtomicU64,
}

impl SequentialIds {
    pub fn new(prefix: &str) -> Self {
        Self { prefix: prefix.to_string(), counter: AtomicU64::new(0) }
    }
}

impl IdGenerator for SequentialIds {
    fn next_id(&self) -> String {
        format!("{}{}", self.prefix, self.counter.fetch_add(1, Ordering::SeqCst) + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    BackendUnavailable,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::BadRequest => "bad_request",
            ErrorCode::NotFound => "not_found",
            ErrorCode::BackendUnavailable => "backend_unavailable",
            ErrorCode::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{} ({}): {message}", code.as_str(), trace_id)]
pub struct ServiceError {
    pub code: ErrorCode,
    pub message: String,
    pub trace_id: String,
}

impl ServiceError {
    pub fn new(code: ErrorCode, message: impl Into<String>, trace_id: impl Into<String>) -> Self {
        Self { code, message: message.into(), trace_id: trace_id.into() }
    }
}

pub fn error_code(e: &AgentError) -> ErrorCode {
    match e {
        AgentError::Usage(_) | AgentError::NoModel(_) => ErrorCode::BadRequest,
        AgentError::Gateway(GatewayError::Config(_)) => ErrorCode::Internal,
        AgentError::Gateway(_) => ErrorCode::BackendUnavailable,
        AgentError::Embed(hypograph_core::embed::EmbedError::Backend(_)) => ErrorCode::BackendUnavailable,
        _ => ErrorCode::Internal,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub timestamp: DateTime<Utc>,
    pub user_input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<AgentResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ServiceError>,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Append-only JSON-lines log, flushed after every record.
pub struct SessionLog {
    path: PathBuf,
    file: Mutex<File>,
    turn: AtomicUsize,
}

impl SessionLog {
    fn create(path: PathBuf) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new().create_new(true).append(true).open(&path)?;
        Ok(Self { path, file: Mutex::new(file), turn: AtomicUsize::new(0) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&self, record: &Value) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record).map_err(std::io::Error::other)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        f.write_all(line.as_bytes())?;
        f.flush()
    }
}

impl ExchangeSink for SessionLog {
    fn record(&self, ex: &Exchange) {
        let input: String = ex.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n");
        let record = json!({
            "type": "exchange",
            "turn": self.turn.load(Ordering::SeqCst),
            "agent": ex.agent,
            "backend": ex.backend,
            "model": ex.model,
            "attempt": ex.attempt,
            "input_sha256": sha256_hex(&input),
            "output_sha256": ex.response.as_deref().map(sha256_hex),
            "messages": ex.messages,
            "response": ex.response,
            "error": ex.error,
        });
        if let Err(e) = self.append(&record) {
            log::error!("cannot write session log {}: {e}", self.path.display());
        }
    }
}

pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub turns: Vec<TurnRecord>,
    log: SessionLog,
}

impl Session {
    pub fn log_path(&self) -> &Path {
        self.log.path()
    }

    /// (input, answer) of every successful turn.
    pub fn transcript(&self) -> Vec<(String, String)> {
        self.turns
            .iter()
            .filter_map(|t| t.response.as_ref().map(|r| (t.user_input.clone(), r.answer_text.clone())))
            .collect()
    }
}

/// Shared state behind every session, for both the terminal and HTTP.
pub struct Engine {
    pub res: Resources,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdGenerator>,
    log_dir: PathBuf,
    explanations: RwLock<BTreeMap<String, Explanation>>,
}

impl Engine {
    pub fn new(res: Resources, clock: Arc<dyn Clock>, ids: Arc<dyn IdGenerator>, log_dir: PathBuf) -> Self {
        Self { res, clock, ids, log_dir, explanations: RwLock::new(BTreeMap::new()) }
    }

    pub fn log_dir(&self) -> &Path {
        &self.log_dir
    }

    /// Creates the session and its log file with a `session_start` record.
    pub fn open_session(&self) -> std::io::Result<Session> {
        std::fs::create_dir_all(&self.log_dir)?;
        let id = self.ids.next_id();
        let created_at = self.clock.now();
        let path = self.log_dir.join(format!("session_{id}_{}.jsonl", file_timestamp(created_at)));
        let log = SessionLog::create(path)?;
        log.append(&json!({"type": "session_start", "session_id": id, "created_at": stamp(created_at)}))?;
        Ok(Session { id, created_at, turns: Vec::new(), log })
    }

    /// Runs one user line. The turn is in the session log before this
    /// returns.
    pub fn handle(&self, session: &mut Session, user_input: &str) -> Result<AgentResponse, ServiceError> {
        let turn = session.turns.len() + 1;
        let trace_id = format!("{}-{turn}", session.id);
        let floor = session.turns.last().map_or(session.created_at, |t| t.timestamp);
        let now = self.clock.now().max(floor);
        session.log.turn.store(turn, Ordering::SeqCst);
        let transcript = session.transcript();
        let view = SessionView { session_id: &session.id, now, transcript: &transcript };
        let outcome = respond(&self.res, &session.log, user_input, &view);
        let (response, error) = match outcome {
            Ok((resp, artifacts)) => {
                let mut store = self.explanations.write().unwrap();
                for (id, e) in artifacts.explanations {
                    store.insert(id, e);
                }
                (Some(resp), None)
            }
            Err(e) => {
                let err = ServiceError::new(error_code(&e), e.to_string(), trace_id.clone());
                log::warn!("turn {trace_id} failed: {}", err.message);
                (None, Some(err))
            }
        };
        let record = TurnRecord { turn, timestamp: now, user_input: user_input.to_string(), response, error };
        let mut line = serde_json::to_value(&record).expect("turn record serializes");
        line.as_object_mut().unwrap().insert("type".into(), "turn".into());
        line.as_object_mut().unwrap().insert("trace_id".into(), trace_id.clone().into());
        if let Err(e) = session.log.append(&line) {
            return Err(ServiceError::new(ErrorCode::Internal, format!("cannot write session log: {e}"), trace_id));
        }
        let result = match (&record.response, &record.error) {
            (Some(r), _) => Ok(r.clone()),
            (None, Some(e)) => Err(e.clone()),
            (None, None) => unreachable!(),
        };
        session.turns.push(record);
        result
    }

    pub fn explanation(&self, prediction_id: &str) -> Option<Explanation> {
        self.explanations.read().unwrap().get(prediction_id).cloned()
    }
}

/// Terminal rendering: the answer followed by one block per evidence item.
pub fn render_response(r: &AgentResponse) -> String {
    let mut s = r.answer_text.trim_end().to_string();
    s.push('\n');
    for e in &r.evidence {
        s.push('\n');
        match e {
            Evidence::Cypher { query, rows, .. } => {
                s.push_str(&format!("cypher command used to access this information ({} rows):\n{query}\n", rows.len()));
            }
            Evidence::Citation { pmid, article_type, section, chunk, score, .. } => {
                s.push_str(&format!(
                    "citation: PMID {pmid} [{}] section {section} ({chunk}), score {score:.4}\n",
                    article_type.as_str()
                ));
            }
            Evidence::Prediction { prediction_id, head, tail, probability, dot_file, .. } => {
                s.push_str(&format!(
                    "prediction {prediction_id}: {head} -- {tail}, probability {probability:.4}, explanation graph {dot_file}\n"
                ));
            }
            Evidence::Summary { file } => s.push_str(&format!("summary saved to {file}\n")),
        }
    }
    s
}

pub const BANNER: &str = "Commands: query <question>, predict <request>, search <question>, summarize, exit.";

/// Reads lines until `exit` or end of input. Each turn is logged before
/// its reply is printed. With `echo`, input lines are copied to `out` so
/// that piped sessions read as a transcript. Returns the process exit code.
pub fn repl_loop(engine: &Engine, input: impl BufRead, out: &mut impl Write, echo: bool) -> i32 {
    let mut session = match engine.open_session() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(out, "cannot create session log in {}: {e}", engine.log_dir().display());
            return 1;
        }
    };
    let _ = writeln!(out, "Session {} started. {BANNER}", session.id);
    let mut lines = input.lines();
    loop {
        let _ = write!(out, "> ");
        let _ = out.flush();
        let line = match lines.next() {
            Some(Ok(l)) => l,
            Some(Err(e)) => {
                let _ = writeln!(out, "\ninput error: {e}");
                return 1;
            }
            None => {
                let _ = writeln!(out);
                break;
            }
        };
        let text = line.trim();
        if text.eq_ignore_ascii_case("exit") || text.eq_ignore_ascii_case("quit") {
            break;
        }
        if text.is_empty() {
            continue;
        }
        if echo {
            let _ = writeln!(out, "{text}");
        }
        match engine.handle(&mut session, text) {
            Ok(r) => {
                let _ = writeln!(out, "{}", render_response(&r));
            }
            Err(e) => {
                let _ = writeln!(out, "error [{}]: {} (trace {})\n", e.code.as_str(), e.message, e.trace_id);
            }
        }
    }
    let _ = writeln!(out, "Session log: {}", session.log_path().file_name().unwrap_or_default().to_string_lossy());
    0
}
