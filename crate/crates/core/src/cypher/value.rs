use std::cmp::Ordering;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKey, NodeId};

/// A cell of a [`ResultTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Text form used in TSV cells: strings bare, everything else as JSON.
    pub fn render(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            other => serde_json::to_string(other).expect("values serialize"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Header line plus one line per row; tabs and newlines inside cells
    /// are escaped as `\t` and `\n`.
    pub fn to_tsv(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n");
        let mut out = self.columns.iter().map(|c| esc(c)).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|v| esc(&v.render())).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Runtime value; graph entities render to strings on output.
#[derive(Debug, Clone)]
pub(crate) enum Val {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Arc<str>),
    List(Vec<Val>),
    Node(NodeId),
    Rel(EdgeKey),
}

impl Val {
    fn rank(&self) -> u8 {
        match self {
            Val::Node(_) => 0,
            Val::Rel(_) => 1,
            Val::List(_) => 2,
            Val::Str(_) => 3,
            Val::Bool(_) => 4,
            Val::Int(_) | Val::Float(_) => 5,
            Val::Null => 6,
        }
    }

    pub(crate) fn to_value(&self) -> Value {
        match self {
            Val::Null => Value::Null,
            Val::Bool(b) => Value::Bool(*b),
            Val::Int(i) => Value::Int(*i),
            Val::Float(f) => Value::Float(*f),
            Val::Str(s) => Value::Str(s.to_string()),
            Val::List(items) => Value::List(items.iter().map(Val::to_value).collect()),
            Val::Node(n) => Value::Str(n.as_str().to_string()),
            Val::Rel(k) => Value::Str(k.relation.to_string()),
        }
    }

    pub(crate) fn str(s: &str) -> Val {
        Val::Str(Arc::from(s))
    }
}

fn num(v: &Val) -> Option<f64> {
    match v {
        Val::Int(i) => Some(*i as f64),
        Val::Float(f) => Some(*f),
        _ => None,
    }
}

/// Sort order across kinds: nodes, relationships, lists, strings, booleans,
/// numbers, then null.
pub(crate) fn total_cmp(a: &Val, b: &Val) -> Ordering {
    match (a, b) {
        (Val::Node(x), Val::Node(y)) => x.cmp(y),
        (Val::Rel(x), Val::Rel(y)) => x.cmp(y),
        (Val::List(x), Val::List(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = total_cmp(p, q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        (Val::Str(x), Val::Str(y)) => x.as_bytes().cmp(y.as_bytes()),
        (Val::Bool(x), Val::Bool(y)) => x.cmp(y),
        (Val::Int(x), Val::Int(y)) => x.cmp(y),
        _ if a.rank() == 5 && b.rank() == 5 => num(a).unwrap().total_cmp(&num(b).unwrap()),
        _ => a.rank().cmp(&b.rank()),
    }
}

/// Kind mismatch between compared operands.
pub(crate) struct Mismatch;

/// Equality as seen by `=`: null never equals anything; values of
/// different kinds are a mismatch.
pub(crate) fn equals(a: &Val, b: &Val) -> Result<bool, Mismatch> {
    match (a, b) {
        (Val::Null, _) | (_, Val::Null) => Ok(false),
        (Val::Bool(x), Val::Bool(y)) => Ok(x == y),
        (Val::Int(x), Val::Int(y)) => Ok(x == y),
        (Val::Str(x), Val::Str(y)) => Ok(x == y),
        (Val::Node(x), Val::Node(y)) => Ok(x == y),
        (Val::Rel(x), Val::Rel(y)) => Ok(x == y),
        (Val::List(x), Val::List(y)) => Ok(x.len() == y.len() && x.iter().zip(y).all(|(p, q)| matches!(equals(p, q), Ok(true)))),
        _ => match (num(a), num(b)) {
            (Some(x), Some(y)) => Ok(x == y),
            _ => Err(Mismatch),
        },
    }
}

/// Structural identity used for grouping and DISTINCT.
impl PartialEq for Val {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Val::Null, Val::Null) => true,
            (Val::Bool(a), Val::Bool(b)) => a == b,
            (Val::Int(a), Val::Int(b)) => a == b,
            (Val::Float(a), Val::Float(b)) => a.to_bits() == b.to_bits(),
            (Val::Str(a), Val::Str(b)) => a == b,
            (Val::List(a), Val::List(b)) => a == b,
            (Val::Node(a), Val::Node(b)) => a == b,
            (Val::Rel(a), Val::Rel(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Val {}

impl Hash for Val {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Val::Null => {}
            Val::Bool(b) => b.hash(state),
            Val::Int(i) => {
                0u8.hash(state);
                i.hash(state)
            }
            Val::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state)
            }
            Val::Str(s) => s.hash(state),
            Val::List(items) => items.hash(state),
            Val::Node(n) => n.hash(state),
            Val::Rel(k) => k.hash(state),
        }
    }
}
