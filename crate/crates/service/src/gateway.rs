//! Chat-completion routing for the agents: OpenAI-compatible and Ollama
//! HTTP backends plus a scripted mock.
//!
//! Only this module talks to model endpoints. Every attempt, successful or
//! not, is handed to an [`ExchangeSink`] before `complete` returns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const DEFAULT_LOCAL_ENDPOINT: &str = "http://localhost:11434";
pub const DEFAULT_OPENAI_ENDPOINT: &str = "https://api.openai.com/v1";
/// Overrides the key file named in the agent config.
pub const KEY_FILE_ENV: &str = "HYPOGRAPH_KEY_FILE";
const BODY_PREVIEW: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentName {
    CypherQuery,
    QueryVerification,
    TextEvaluator,
    Reasoning,
    Summarizer,
    PredictionInterpreter,
}

impl AgentName {
    pub const ALL: [AgentName; 6] = [
        AgentName::CypherQuery,
        AgentName::QueryVerification,
        AgentName::TextEvaluator,
        AgentName::Reasoning,
        AgentName::Summarizer,
        AgentName::PredictionInterpreter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentName::CypherQuery => "cypher_query",
            AgentName::QueryVerification => "query_verification",
            AgentName::TextEvaluator => "text_evaluator",
            AgentName::Reasoning => "reasoning",
            AgentName::Summarizer => "summarizer",
            AgentName::PredictionInterpreter => "prediction_interpreter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl std::fmt::Display for AgentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    OpenaiCompatible,
    /// Ollama chat API.
    LocalHttp,
    Mock,
}

/// One scripted reply: used when `pattern` occurs in the last user message
/// (case-insensitive). `{{input}}` in the response is replaced by that
/// message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub pattern: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub default: String,
}

impl MockScript {
    pub fn reply(&self, input: &str) -> String {
        let lower = input.to_lowercase();
        let template = self
            .rules
            .iter()
            .find(|r| lower.contains(&r.pattern.to_lowercase()))
            .map_or(&self.default, |r| &r.response);
        template.replace("{{input}}", input)
    }
}

fn default_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub backend: BackendKind,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// One-line API key file for the OpenAI-compatible backend.
    #[serde(default)]
    pub key_file: Option<PathBuf>,
    #[serde(default)]
    pub mock: Option<MockScript>,
}

impl AgentConfig {
    pub fn mock(script: MockScript) -> Self {
        Self {
            backend: BackendKind::Mock,
            model: "mock".into(),
            endpoint: None,
            temperature: 0.0,
            max_retries: 0,
            key_file: None,
            mock: Some(script),
        }
    }

    fn endpoint(&self) -> &str {
        match (&self.endpoint, self.backend) {
            (Some(e), _) => e.trim_end_matches('/'),
            (None, BackendKind::LocalHttp) => DEFAULT_LOCAL_ENDPOINT,
            (None, _) => DEFAULT_OPENAI_ENDPOINT,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("agent {0} is not configured")]
    NotConfigured(AgentName),
    #[error("backend for agent {agent} unavailable after {attempts} attempts: {message}")]
    BackendUnavailable { agent: AgentName, attempts: u32, message: String },
    #[error("agent {agent}: HTTP {status}: {body}")]
    Http { agent: AgentName, status: u16, body: String },
    #[error("agent {agent}: malformed response: {message}")]
    BadResponse { agent: AgentName, message: String },
    #[error("agent config: {0}")]
    Config(String),
}

/// Failure of a single HTTP exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// Connection, timeout or other transport failure; retried.
    Unreachable(String),
    /// Non-2xx response; not retried.
    Status { status: u16, body: String },
}

pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<Value, TransportError>;
}

/// Blocking reqwest client.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let client = reqwest::blocking::Client::builder().timeout(timeout).build().expect("http client");
        Self { client }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(120))
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<Value, TransportError> {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = bearer {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| TransportError::Unreachable(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Status { status: status.as_u16(), body: truncate(&text, BODY_PREVIEW) });
        }
        serde_json::from_str(&text)
            .map_err(|e| TransportError::Status { status: status.as_u16(), body: format!("invalid JSON: {e}") })
    }
}

/// Refuses every request. Used where no network access is allowed.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn post_json(&self, url: &str, _: Option<&str>, _: &Value) -> Result<Value, TransportError> {
        Err(TransportError::Unreachable(format!("network disabled: {url}")))
    }
}

pub trait Sleeper: Send + Sync {
    fn sleep(&self, d: Duration);
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

pub(crate) fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        return s.to_string();
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

/// One request/response attempt as recorded in session logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub agent: AgentName,
    pub backend: BackendKind,
    pub model: String,
    pub attempt: u32,
    pub messages: Vec<ChatMessage>,
    pub response: Option<String>,
    pub error: Option<String>,
}

pub trait ExchangeSink: Send + Sync {
    fn record(&self, exchange: &Exchange);
}

pub struct NoSink;

impl ExchangeSink for NoSink {
    fn record(&self, _: &Exchange) {}
}

pub struct Gateway {
    agents: BTreeMap<AgentName, AgentConfig>,
    transport: Arc<dyn Transport>,
    sleeper: Arc<dyn Sleeper>,
    backoff: Duration,
}

impl Gateway {
    pub fn new(agents: BTreeMap<AgentName, AgentConfig>, transport: Arc<dyn Transport>) -> Self {
        Self { agents, transport, sleeper: Arc::new(ThreadSleeper), backoff: Duration::from_millis(250) }
    }

    pub fn with_sleeper(mut self, sleeper: Arc<dyn Sleeper>, backoff: Duration) -> Self {
        self.sleeper = sleeper;
        self.backoff = backoff;
        self
    }

    /// Parses an agent config file: a map from agent name to settings.
    pub fn parse_config(text: &str) -> Result<BTreeMap<AgentName, AgentConfig>, GatewayError> {
        let raw: BTreeMap<String, AgentConfig> =
            serde_json::from_str(text).map_err(|e| GatewayError::Config(e.to_string()))?;
        let mut out = BTreeMap::new();
        for (name, cfg) in raw {
            let agent = AgentName::parse(&name).ok_or_else(|| GatewayError::Config(format!("unknown agent {name:?}")))?;
            if !(cfg.temperature >= 0.0) {
                return Err(GatewayError::Config(format!("{name}: temperature must be non-negative")));
            }
            if cfg.backend == BackendKind::Mock && cfg.mock.is_none() {
                return Err(GatewayError::Config(format!("{name}: mock backend needs a script")));
            }
            out.insert(agent, cfg);
        }
        Ok(out)
    }

    pub fn load_config(path: &Path) -> Result<BTreeMap<AgentName, AgentConfig>, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse_config(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for c in cfg.values_mut() {
            if let Some(k) = &c.key_file {
                if k.is_relative() {
                    c.key_file = Some(base.join(k));
                }
            }
        }
        Ok(cfg)
    }

    pub fn config(&self, agent: AgentName) -> Option<&AgentConfig> {
        self.agents.get(&agent)
    }

    pub fn all_mock(&self) -> bool {
        self.agents.values().all(|c| c.backend == BackendKind::Mock)
    }

    fn api_key(&self, agent: AgentName, cfg: &AgentConfig) -> Result<Option<String>, GatewayError> {
        let path = std::env::var_os(KEY_FILE_ENV).map(PathBuf::from).or_else(|| cfg.key_file.clone());
        let Some(path) = path else { return Ok(None) };
        let text = std::fs::read_to_string(&path).map_err(|e| GatewayError::BackendUnavailable {
            agent,
            attempts: 0,
            message: format!("cannot read key file {}: {e}", path.display()),
        })?;
        Ok(text.lines().next().map(|l| l.trim().to_string()).filter(|k| !k.is_empty()))
    }

    fn request(cfg: &AgentConfig, messages: &[ChatMessage]) -> (String, Value) {
        match cfg.backend {
            BackendKind::LocalHttp => (
                format!("{}/api/chat", cfg.endpoint()),
                json!({
                    "model": cfg.model,
                    "messages": messages,
                    "stream": false,
                    "options": {"temperature": cfg.temperature},
                }),
            ),
            _ => (
                format!("{}/chat/completions", cfg.endpoint()),
                json!({"model": cfg.model, "messages": messages, "temperature": cfg.temperature}),
            ),
        }
    }

    fn extract(agent: AgentName, backend: BackendKind, v: &Value) -> Result<String, GatewayError> {
        let text = match backend {
            BackendKind::LocalHttp => v.pointer("/message/content"),
            _ => v.pointer("/choices/0/message/content"),
        };
        text.and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| GatewayError::BadResponse { agent, message: truncate(&v.to_string(), BODY_PREVIEW) })
    }

    /// Routes `messages` to the agent's backend. Transport failures are
    /// retried up to `max_retries` times with exponential backoff.
    pub fn complete(
        &self,
        agent: AgentName,
        messages: &[ChatMessage],
        sink: &dyn ExchangeSink,
    ) -> Result<String, GatewayError> {
        let cfg = self.agents.get(&agent).ok_or(GatewayError::NotConfigured(agent))?;
        let mut exchange = Exchange {
            agent,
            backend: cfg.backend,
            model: cfg.model.clone(),
            attempt: 1,
            messages: messages.to_vec(),
            response: None,
            error: None,
        };
        if cfg.backend == BackendKind::Mock {
            let last = messages.iter().rev().find(|m| m.role == Role::User).map_or("", |m| m.content.as_str());
            let reply = cfg.mock.as_ref().map(|m| m.reply(last)).unwrap_or_default();
            exchange.response = Some(reply.clone());
            sink.record(&exchange);
            return Ok(reply);
        }
        let key = if cfg.backend == BackendKind::OpenaiCompatible { self.api_key(agent, cfg)? } else { None };
        let (url, body) = Self::request(cfg, messages);
        let attempts = cfg.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            exchange.attempt = attempt;
            match self.transport.post_json(&url, key.as_deref(), &body) {
                Ok(v) => {
                    let result = Self::extract(agent, cfg.backend, &v);
                    match &result {
                        Ok(text) => exchange.response = Some(text.clone()),
                        Err(e) => exchange.error = Some(e.to_string()),
                    }
                    sink.record(&exchange);
                    return result;
                }
                Err(TransportError::Status { status, body }) => {
                    exchange.error = Some(format!("HTTP {status}: {body}"));
                    sink.record(&exchange);
                    return Err(GatewayError::Http { agent, status, body });
                }
                Err(TransportError::Unreachable(msg)) => {
                    log::warn!("agent {agent}: attempt {attempt}/{attempts} failed: {msg}");
                    exchange.error = Some(msg.clone());
                    sink.record(&exchange);
                    last_error = msg;
                    if attempt < attempts {
                        self.sleeper.sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
                    }
                }
            }
        }
        Err(GatewayError::BackendUnavailable { agent, attempts, message: last_error })
    }
}

/// Embeddings over the OpenAI-compatible `/embeddings` endpoint.
pub struct HttpEmbedder {
    transport: Arc<dyn Transport>,
    url: String,
    model: String,
    key: Option<String>,
    dim: usize,
}

impl HttpEmbedder {
    pub fn new(transport: Arc<dyn Transport>, endpoint: Option<&str>, model: &str, key_file: Option<&Path>, dim: usize) -> Result<Self, GatewayError> {
        let path = std::env::var_os(KEY_FILE_ENV).map(PathBuf::from).or_else(|| key_file.map(Path::to_path_buf));
        let key = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| GatewayError::Config(format!("key file {}: {e}", p.display())))?;
                text.lines().next().map(|l| l.trim().to_string()).filter(|k| !k.is_empty())
            }
            None => None,
        };
        let base = endpoint.unwrap_or(DEFAULT_OPENAI_ENDPOINT).trim_end_matches('/');
        Ok(Self { transport, url: format!("{base}/embeddings"), model: model.to_string(), key, dim })
    }
}

impl hypograph_core::embed::Embedder for HttpEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, hypograph_core::embed::EmbedError> {
        use hypograph_core::embed::EmbedError;
        let body = json!({"model": self.model, "input": text});
        let v = self.transport.post_json(&self.url, self.key.as_deref(), &body).map_err(|e| match e {
            TransportError::Unreachable(m) => EmbedError::Backend(m),
            TransportError::Status { status, body } => EmbedError::Backend(format!("HTTP {status}: {body}")),
        })?;
        let vector: Vec<f64> = v
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| EmbedError::Backend(format!("malformed response: {}", truncate(&v.to_string(), BODY_PREVIEW))))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| EmbedError::Backend("non-numeric embedding".into())))
            .collect::<Result<_, _>>()?;
        if vector.len() != self.dim {
            return Err(EmbedError::DimensionMismatch { expected: self.dim, found: vector.len() });
        }
        Ok(vector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Flaky {
        failures: Mutex<u32>,
        calls: Mutex<Vec<(String, Value)>>,
        reply: Value,
    }

    impl Transport for Flaky {
        fn post_json(&self, url: &str, _: Option<&str>, body: &Value) -> Result<Value, TransportError> {
            self.calls.lock().unwrap().push((url.to_string(), body.clone()));
            let mut f = self.failures.lock().unwrap();
            if *f > 0 {
                *f -= 1;
                return Err(TransportError::Unreachable("connection refused".into()));
            }
            Ok(self.reply.clone())
        }
    }

    struct Sleeps(Mutex<Vec<Duration>>);

    impl Sleeper for Sleeps {
        fn sleep(&self, d: Duration) {
            self.0.lock().unwrap().push(d);
        }
    }

    struct Collect(Mutex<Vec<Exchange>>);

    impl ExchangeSink for Collect {
        fn record(&self, e: &Exchange) {
            self.0.lock().unwrap().push(e.clone());
        }
    }

    fn remote(backend: BackendKind, retries: u32) -> AgentConfig {
        AgentConfig {
            backend,
            model: "m".into(),
            endpoint: Some("http://llm.test/v1/".into()),
            temperature: 0.0,
            max_retries: retries,
            key_file: None,
            mock: None,
        }
    }

    fn flaky(failures: u32, reply: Value) -> Arc<Flaky> {
        Arc::new(Flaky { failures: Mutex::new(failures), calls: Mutex::new(Vec::new()), reply })
    }

    #[test]
    fn mock_rules_and_default() {
        let script = MockScript {
            rules: vec![
                MockRule { pattern: "beta blocker".into(), response: "ATC_Class:C07".into() },
                MockRule { pattern: "echo".into(), response: "you said: {{input}}".into() },
            ],
            default: "no idea".into(),
        };
        let gw = Gateway::new(
            BTreeMap::from([(AgentName::Reasoning, AgentConfig::mock(script))]),
            Arc::new(OfflineTransport),
        );
        let ask = |q: &str| gw.complete(AgentName::Reasoning, &[ChatMessage::user(q)], &NoSink).unwrap();
        assert_eq!(ask("which Beta Blocker class?"), "ATC_Class:C07");
        assert_eq!(ask("something else"), "no idea");
        assert_eq!(ask("echo this"), "you said: echo this");
        assert!(matches!(
            gw.complete(AgentName::Summarizer, &[ChatMessage::user("x")], &NoSink),
            Err(GatewayError::NotConfigured(AgentName::Summarizer))
        ));
    }

    #[test]
    fn retries_transport_failures_with_backoff() {
        let t = flaky(2, json!({"choices": [{"message": {"role": "assistant", "content": "ok"}}]}));
        let sleeps = Arc::new(Sleeps(Mutex::new(Vec::new())));
        let gw = Gateway::new(BTreeMap::from([(AgentName::Reasoning, remote(BackendKind::OpenaiCompatible, 3))]), t.clone())
            .with_sleeper(sleeps.clone(), Duration::from_millis(10));
        let sink = Collect(Mutex::new(Vec::new()));
        assert_eq!(gw.complete(AgentName::Reasoning, &[ChatMessage::user("hi")], &sink).unwrap(), "ok");
        let calls = t.calls.lock().unwrap();
        assert_eq!(calls.len(), 3);
        assert_eq!(calls[0].0, "http://llm.test/v1/chat/completions");
        assert_eq!(calls[0].1["temperature"], json!(0.0));
        assert_eq!(calls[0].1["messages"][0]["role"], "user");
        assert_eq!(*sleeps.0.lock().unwrap(), [Duration::from_millis(10), Duration::from_millis(20)]);
        let logged = sink.0.lock().unwrap();
        assert_eq!(logged.iter().map(|e| e.attempt).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(logged[0].error.is_some() && logged[2].response.as_deref() == Some("ok"));
    }

    #[test]
    fn exhausted_retries_name_the_agent() {
        let t = flaky(10, Value::Null);
        let gw = Gateway::new(BTreeMap::from([(AgentName::TextEvaluator, remote(BackendKind::LocalHttp, 2))]), t.clone())
            .with_sleeper(Arc::new(Sleeps(Mutex::new(Vec::new()))), Duration::ZERO);
        let err = gw.complete(AgentName::TextEvaluator, &[ChatMessage::user("hi")], &NoSink).unwrap_err();
        assert!(matches!(err, GatewayError::BackendUnavailable { agent: AgentName::TextEvaluator, attempts: 3, .. }));
        assert!(err.to_string().contains("text_evaluator"));
        assert_eq!(t.calls.lock().unwrap()[0].0, "http://llm.test/v1/api/chat");
    }

    #[test]
    fn http_status_is_not_retried() {
        struct Refuse;
        impl Transport for Refuse {
            fn post_json(&self, _: &str, _: Option<&str>, _: &Value) -> Result<Value, TransportError> {
                Err(TransportError::Status { status: 429, body: "slow down".into() })
            }
        }
        let gw = Gateway::new(BTreeMap::from([(AgentName::Reasoning, remote(BackendKind::OpenaiCompatible, 3))]), Arc::new(Refuse));
        let err = gw.complete(AgentName::Reasoning, &[ChatMessage::user("hi")], &NoSink).unwrap_err();
        assert!(matches!(err, GatewayError::Http { status: 429, ref body, .. } if body == "slow down"));
    }

    #[test]
    fn ollama_reply_shape() {
        let t = flaky(0, json!({"message": {"role": "assistant", "content": "local"}}));
        let gw = Gateway::new(BTreeMap::from([(AgentName::Summarizer, remote(BackendKind::LocalHttp, 0))]), t.clone());
        assert_eq!(gw.complete(AgentName::Summarizer, &[ChatMessage::user("x")], &NoSink).unwrap(), "local");
        assert_eq!(t.calls.lock().unwrap()[0].1["stream"], json!(false));
        let bad = flaky(0, json!({"unexpected": true}));
        let gw = Gateway::new(BTreeMap::from([(AgentName::Summarizer, remote(BackendKind::LocalHttp, 0))]), bad);
        assert!(matches!(
            gw.complete(AgentName::Summarizer, &[ChatMessage::user("x")], &NoSink),
            Err(GatewayError::BadResponse { .. })
        ));
    }

    #[test]
    fn config_file_parsing() {
        let cfg = Gateway::parse_config(
            r#"{"reasoning": {"backend": "local_http", "model": "llama3"},
                "cypher_query": {"backend": "mock", "mock": {"rules": [], "default": "MATCH (n) RETURN n"}}}"#,
        )
        .unwrap();
        assert_eq!(cfg[&AgentName::Reasoning].max_retries, 3);
        assert_eq!(cfg[&AgentName::Reasoning].endpoint(), DEFAULT_LOCAL_ENDPOINT);
        assert!(Gateway::parse_config(r#"{"planner": {"backend": "mock"}}"#).is_err());
        assert!(Gateway::parse_config(r#"{"reasoning": {"backend": "mock"}}"#).is_err());
        assert!(Gateway::parse_config(r#"{"reasoning": {"backend": "openai_compatible", "temperature": -1}}"#).is_err());
    }

    #[test]
    fn http_embedder_reads_openai_shape() {
        use hypograph_core::embed::Embedder;
        let t = flaky(0, json!({"data": [{"embedding": [0.5, -1.0, 2.0]}]}));
        let e = HttpEmbedder::new(t.clone(), Some("http://h/v1/"), "emb", None, 3).unwrap();
        assert_eq!(e.embed("text").unwrap(), vec![0.5, -1.0, 2.0]);
        assert_eq!(t.calls.lock().unwrap()[0].0, "http://h/v1/embeddings");
        let wrong = HttpEmbedder::new(flaky(0, json!({"data": [{"embedding": [1.0]}]})), None, "emb", None, 3).unwrap();
        assert!(wrong.embed("text").is_err());
    }

    #[test]
    fn truncation_respects_char_boundaries() {
        assert_eq!(truncate("abc", 5), "abc");
        assert_eq!(truncate("ééé", 3), "é...");
    }
}
