//! The `summarize` command.

use std::io::Write as _;
use std::path::PathBuf;

use chrono::{DateTime, Utc};

use hypograph_core::corpus::summarize_sections;
use hypograph_core::embed::tokenize;

use super::{AgentCtx, AgentError};
use crate::gateway::AgentName;

/// Compact ISO 8601 UTC timestamp with milliseconds, safe in file names.
pub fn file_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y%m%dT%H%M%S%.3fZ").to_string()
}

pub fn render_transcript(transcript: &[(String, String)]) -> Vec<(String, String)> {
    transcript
        .iter()
        .enumerate()
        .map(|(i, (q, a))| (format!("turn {}", i + 1), format!("User: {q}\nAssistant: {a}")))
        .collect()
}

/// Condenses the transcript with the summarizer agent and writes the result
/// to `summary_<session>_<timestamp>.txt` in the summary directory. A
/// transcript over the token budget is first summarized turn by turn.
pub fn summarize_session(
    ctx: &AgentCtx<'_>,
    session_id: &str,
    now: DateTime<Utc>,
    transcript: &[(String, String)],
) -> Result<(String, PathBuf), AgentError> {
    if transcript.is_empty() {
        return Err(AgentError::Usage("summarize: nothing to summarize yet".into()));
    }
    let budget = ctx.res.settings.summary_budget;
    let sections = render_transcript(transcript);
    let total: usize = sections.iter().map(|(_, t)| tokenize(t).len()).sum();
    let text = if total > budget {
        let condense = |t: &str| -> Result<String, String> {
            ctx.ask(AgentName::Summarizer, "summarizer", &[("text", t.to_string())]).map_err(|e| e.to_string())
        };
        summarize_sections(sections, &condense, budget).map_err(|e| AgentError::Io(e.to_string()))?.text
    } else {
        sections.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join("\n\n")
    };
    let summary = ctx.ask(AgentName::Summarizer, "summarizer", &[("text", text)])?;

    let dir = &ctx.res.summary_dir;
    std::fs::create_dir_all(dir).map_err(|e| AgentError::Io(format!("{}: {e}", dir.display())))?;
    let stem = format!("summary_{session_id}_{}", file_timestamp(now));
    let mut suffix = 0;
    loop {
        let name = if suffix == 0 { format!("{stem}.txt") } else { format!("{stem}_{suffix}.txt") };
        let path = dir.join(name);
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                f.write_all(summary.as_bytes()).map_err(|e| AgentError::Io(format!("{}: {e}", path.display())))?;
                return Ok((summary, path));
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => suffix += 1,
            Err(e) => return Err(AgentError::Io(format!("{}: {e}", path.display()))),
        }
    }
}
