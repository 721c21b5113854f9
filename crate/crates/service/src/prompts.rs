//! Prompt templates with `{name}` placeholders. `{{` and `}}` stand for
//! literal braces. Bound values are inserted verbatim and never re-expanded.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template {template}: missing bindings: {}", missing.join(", "))]
    Missing { template: String, missing: Vec<String> },
    #[error("template {template}: {message}")]
    Syntax { template: String, message: String },
    #[error("no template named {0}")]
    Unknown(String),
    #[error("prompt file: {0}")]
    File(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub template: String,
    pub required: BTreeSet<String>,
    pieces: Vec<Piece>,
}

impl PromptTemplate {
    pub fn parse(name: &str, template: &str) -> Result<Self, PromptError> {
        let err = |message: String| PromptError::Syntax { template: name.to_string(), message };
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut chars = template.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '{' if chars.peek().map(|p| p.1) == Some('{') => {
                    chars.next();
                    text.push('{');
                }
                '}' if chars.peek().map(|p| p.1) == Some('}') => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let mut slot = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) => break,
                            Some((_, ch)) if ch.is_ascii_alphanumeric() || ch == '_' => slot.push(ch),
                            _ => return Err(err(format!("malformed placeholder at byte {i}"))),
                        }
                    }
                    if slot.is_empty() {
                        return Err(err(format!("empty placeholder at byte {i}")));
                    }
                    if !text.is_empty() {
                        pieces.push(Piece::Text(std::mem::take(&mut text)));
                    }
                    pieces.push(Piece::Slot(slot));
                }
                '}' => return Err(err(format!("unmatched '}}' at byte {i}"))),
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        let required = pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.clone()),
                Piece::Text(_) => None,
            })
            .collect();
        Ok(Self { name: name.to_string(), template: template.to_string(), required, pieces })
    }

    pub fn render(&self, bindings: &BTreeMap<&str, String>) -> Result<String, PromptError> {
        let missing: Vec<String> = self.required.iter().filter(|r| !bindings.contains_key(r.as_str())).cloned().collect();
        if !missing.is_empty() {
            return Err(PromptError::Missing { template: self.name.clone(), missing });
        }
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(&bindings[s.as_str()]),
            }
        }
        Ok(out)
    }
}

/// Built-in templates; a prompt file may override any of them.
pub const DEFAULT_PROMPTS: &[(&str, &str, &[&str])] = &[
    (
        "cypher_query",
        "You write read-only Cypher for a biomedical knowledge graph. Node labels are namespaces, \
n.name is the full node id (namespace:id), n.description is its text. Use only MATCH, OPTIONAL MATCH, \
WHERE, WITH, RETURN, ORDER BY, LIMIT and UNION ALL. Reply with the query only.\n\n\
Graph schema:\n{schema}\n\nLinked entities:\n{entities}\n\nQuestion: {question}",
        &["schema", "entities", "question"],
    ),
    (
        "query_verification",
        "The Cypher query below failed validation. Return a corrected query only.\n\n\
Graph schema:\n{schema}\n\nQuestion: {question}\n\nQuery:\n{query}\n\nProblem: {diagnostics}",
        &["schema", "question", "query", "diagnostics"],
    ),
    (
        "query_reformulation",
        "The Cypher query below ran but returned no rows. Rewrite it so it can answer the question. \
Return the query only.\n\nGraph schema:\n{schema}\n\nLinked entities:\n{entities}\n\nQuestion: {question}\n\nQuery:\n{query}",
        &["schema", "entities", "question", "query"],
    ),
    (
        "query_answer",
        "Answer the question using only this table from the knowledge graph.\n\n\
Question: {question}\n\nTable:\n{table}",
        &["question", "table"],
    ),
    (
        "text_evaluator",
        "Decide whether the document is relevant to the question. Reply with one line starting with \
\"relevant:\" or \"irrelevant:\" followed by a short reason.\n\nQuestion: {question}\n\n\
Document {pmid} ({article_type}): {title}\n{passages}",
        &["question", "pmid", "article_type", "title", "passages"],
    ),
    (
        "literature_answer",
        "Using only the documents below, answer the question. Cite PMIDs.\n\nQuestion: {question}\n\nDocuments:\n{documents}",
        &["question", "documents"],
    ),
    (
        "reasoning",
        "You help explore drug and disease hypotheses over a knowledge graph. Reply briefly.\n\nUser: {question}",
        &["question"],
    ),
    (
        "summarizer",
        "Summarize the following text, keeping entity ids, PMIDs and numbers exact.\n\n{text}",
        &["text"],
    ),
    (
        "prediction_interpreter",
        "Explain what the predicted link and its most influential edges suggest. Do not restate the scores.\n\n\
Predicted link: {head} -- {tail} (probability {probability})\n\nInfluential edges:\n{edges}\n\n\
Existing relations among these nodes:\n{relations}",
        &["head", "tail", "probability", "edges", "relations"],
    ),
];

#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: BTreeMap<String, PromptTemplate>,
}

impl Default for PromptSet {
    fn default() -> Self {
        let templates = DEFAULT_PROMPTS
            .iter()
            .map(|(n, t, _)| (n.to_string(), PromptTemplate::parse(n, t).expect("built-in template")))
            .collect();
        Self { templates }
    }
}

impl PromptSet {
    /// Defaults overridden by a JSON map of template name to text. An
    /// override must use exactly the placeholders of the template it
    /// replaces.
    pub fn from_json(text: &str) -> Result<Self, PromptError> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text).map_err(|e| PromptError::File(e.to_string()))?;
        let mut set = Self::default();
        for (name, body) in raw {
            let t = PromptTemplate::parse(&name, &body)?;
            let Some(builtin) = set.templates.get(&name) else {
                return Err(PromptError::Unknown(name));
            };
            if t.required != builtin.required {
                return Err(PromptError::Syntax {
                    template: name,
                    message: format!(
                        "placeholders {:?} differ from expected {:?}",
                        t.required, builtin.required
                    ),
                });
            }
            set.templates.insert(name, t);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|e| PromptError::File(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, PromptError> {
        self.templates.get(name).ok_or_else(|| PromptError::Unknown(name.to_string()))
    }

    pub fn render(&self, name: &str, bindings: &[(&str, String)]) -> Result<String, PromptError> {
        self.get(name)?.render(&bindings.iter().cloned().collect())
    }
}
