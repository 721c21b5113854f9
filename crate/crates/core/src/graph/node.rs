use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GraphError;

/// Namespaced entity identifier, written `namespace:local_id`.
///
/// The namespace ends at the first colon; the local part may itself contain
/// colons (`GO:GO:0005739` style ids stay intact). Ordering and equality
/// follow the canonical text form, so sorted node lists match sorted
/// `name` strings in query results.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    text: Arc<str>,
    split: usize,
}

impl NodeId {
    pub fn new(namespace: &str, local_id: &str) -> Result<Self, GraphError> {
        if namespace.is_empty() || local_id.is_empty() || namespace.contains(':') {
            return Err(GraphError::InvalidNodeId(format!("{namespace}:{local_id}")));
        }
        Ok(Self {
            text: Arc::from(format!("{namespace}:{local_id}")),
            split: namespace.len(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let text = text.trim();
        match text.find(':') {
            Some(split) if split > 0 && split + 1 < text.len() => Ok(Self {
                text: Arc::from(text),
                split,
            }),
            _ => Err(GraphError::InvalidNodeId(text.to_string())),
        }
    }

    pub fn namespace(&self) -> &str {
        &self.text[..self.split]
    }

    pub fn local_id(&self) -> &str {
        &self.text[self.split + 1..]
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Smallest possible id in `namespace`; not a valid id on its own.
    pub(crate) fn namespace_lower_bound(namespace: &str) -> Self {
        Self {
            text: Arc::from(format!("{namespace}:")),
            split: namespace.len(),
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({})", self.text)
    }
}

impl FromStr for NodeId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        NodeId::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_namespace_boundary_at_first_colon() {
        let id = NodeId::parse("MeSH_Disease:D002312").unwrap();
        assert_eq!(id.namespace(), "MeSH_Disease");
        assert_eq!(id.local_id(), "D002312");

        let go = NodeId::parse("GO:GO:0005739").unwrap();
        assert_eq!(go.namespace(), "GO");
        assert_eq!(go.local_id(), "GO:0005739");
    }

    #[test]
    fn rejects_missing_parts() {
        assert!(NodeId::parse("nocolon").is_err());
        assert!(NodeId::parse(":D1").is_err());
        assert!(NodeId::parse("ns:").is_err());
        assert!(NodeId::new("a:b", "c").is_err());
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(ns in "[A-Za-z_][A-Za-z0-9_]{0,12}", local in "[A-Za-z0-9_.:-]{1,16}") {
            let id = NodeId::new(&ns, &local).unwrap();
            let back = NodeId::parse(&id.to_string()).unwrap();
            prop_assert_eq!(&back, &id);
            prop_assert_eq!(back.namespace(), ns.as_str());
            prop_assert_eq!(back.local_id(), local.as_str());
        }
    }
}
