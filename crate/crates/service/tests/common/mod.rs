#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{TimeZone, Utc};

use hypograph_core::linkpred::train;
use hypograph_service::agents::Resources;
use hypograph_service::config::AppConfig;
use hypograph_service::gateway::{Gateway, OfflineTransport, Sleeper};
use hypograph_service::session::{Engine, SequentialIds, StepClock};
use hypograph_service::startup::{load_graph, load_resources};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

/// The scripted session config with every output redirected into `dir`.
pub fn session_config(dir: &Path) -> AppConfig {
    let mut cfg = AppConfig::load(&fixture("session/config.json")).expect("session config");
    cfg.model = dir.join("model.rglm");
    cfg.summary_dir = dir.to_path_buf();
    cfg.explanation_dir = dir.join("explanations");
    cfg.log_dir = dir.join("log");
    cfg
}

pub fn train_checkpoint(cfg: &AppConfig) {
    let g = load_graph(cfg).expect("graph");
    let (model, _) = train(&g, &cfg.train).expect("training");
    model.save(&cfg.model).expect("checkpoint");
}

pub fn resources(cfg: &AppConfig) -> Resources {
    load_resources(cfg, Arc::new(OfflineTransport)).expect("resources")
}

/// Replaces the agent scripts with `agents_json`.
pub fn with_agents(mut res: Resources, agents_json: &str) -> Resources {
    let agents = Gateway::parse_config(agents_json).expect("agent config");
    res.gateway = Gateway::new(agents, Arc::new(OfflineTransport))
        .with_sleeper(Arc::new(NoSleep), std::time::Duration::from_millis(1));
    res
}

pub struct NoSleep;

impl Sleeper for NoSleep {
    fn sleep(&self, _: std::time::Duration) {}
}

pub fn engine(res: Resources, log_dir: &Path) -> Engine {
    let start = Utc.with_ymd_and_hms(2024, 5, 1, 9, 0, 0).unwrap();
    Engine::new(
        res,
        Arc::new(StepClock::new(start, chrono::Duration::milliseconds(1500))),
        Arc::new(SequentialIds::new("s")),
        log_dir.to_path_buf(),
    )
}

pub fn mock_agent(default: &str) -> serde_json::Value {
    serde_json::json!({"backend": "mock", "model": "scripted", "mock": {"default": default}})
}

pub fn read_log(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .expect("log")
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

pub const SESSION_SCRIPT: [&str; 4] = [
    "query \"Which drugs treat Arrhythmogenic Right Ventricular Dysplasia?\"",
    "predict \"Which beta blocking agents could treat Arrhythmogenic Right Ventricular Dysplasia? Identify the top 2 predictions.\"",
    "search \"atenolol exercise induced ventricular arrhythmias\"",
    "summarize",
];

/// Runs the scripted session through the terminal loop with network access
/// disabled. Returns the printed transcript and the session log path.
pub fn run_scripted_session(dir: &Path) -> (String, PathBuf) {
    let cfg = session_config(dir);
    train_checkpoint(&cfg);
    let engine = engine(resources(&cfg), &cfg.log_dir);
    let mut input = SESSION_SCRIPT.join("\n");
    input.push_str("\nexit\n");
    let mut out = Vec::new();
    let code = hypograph_service::session::repl_loop(&engine, input.as_bytes(), &mut out, true);
    assert_eq!(code, 0);
    let log = std::fs::read_dir(&cfg.log_dir).unwrap().next().unwrap().unwrap().path();
    (String::from_utf8(out).unwrap(), log)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares `actual` with a committed golden file; `UPDATE_GOLDEN=1`
/// rewrites it instead.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).unwrap_or(expected.lines().count().min(actual.lines().count()));
    Err(format!("{name} differs from golden at line {}", line + 1))
}

/// Every Cypher evidence item in the log, re-run on the session graph,
/// must give the recorded table. Returns how many were checked.
pub fn recheck_cypher_evidence(log: &[serde_json::Value], graph: &hypograph_core::graph::KnowledgeGraph) -> Result<usize, String> {
    let mut checked = 0;
    for rec in log.iter().filter(|r| r["type"] == "turn") {
        for ev in rec["response"]["evidence"].as_array().into_iter().flatten() {
            if ev["kind"] != "cypher" {
                continue;
            }
            let query = ev["query"].as_str().unwrap();
            let table = hypograph_core::cypher::run(query, graph).map_err(|e| format!("{query}: {e}"))?;
            // Through text, like the log, so floats parse identically.
            let reparse = |v: String| serde_json::from_str::<serde_json::Value>(&v).unwrap();
            let rows = reparse(serde_json::to_string(&table.rows).unwrap());
            let cols = reparse(serde_json::to_string(&table.columns).unwrap());
            if rows != ev["rows"] || cols != ev["columns"] {
                return Err(format!("re-executed table differs for {query}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
