use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::ConfigError;

/// The fixed set of config sections, sorted.
pub const SECTION_NAMES: [&str; 7] = [
    "action",
    "data",
    "inference",
    "model",
    "optimizer",
    "tokenizer",
    "trainer",
];

pub(crate) fn is_known_section(name: &str) -> bool {
    SECTION_NAMES.contains(&name)
}

/// One declarative config node: a named bag of sections plus an
/// optional parent to inherit from. Stored one node per JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigNode {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub sections: BTreeMap<String, Map<String, Value>>,
}

impl ConfigNode {
    /// Check structural invariants: non-empty name, known sections.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() {
            return Err(ConfigError::InvalidNode("empty node name".to_string()));
        }
        for section in self.sections.keys() {
            if !is_known_section(section) {
                return Err(ConfigError::UnknownSection {
                    origin: self.name.clone(),
                    section: section.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A collection of nodes addressable by name, e.g. one experiment
/// directory's worth of config files.
#[derive(Debug, Clone, Default)]
pub struct NodeSet {
    nodes: BTreeMap<String, ConfigNode>,
}

impl NodeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validate and add one node. Names must be unique.
    pub fn insert(&mut self, node: ConfigNode) -> Result<(), ConfigError> {
        node.validate()?;
        if self.nodes.contains_key(&node.name) {
            return Err(ConfigError::DuplicateNode(node.name));
        }
        self.nodes.insert(node.name.clone(), node);
        Ok(())
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = ConfigNode>) -> Result<Self, ConfigError> {
        let mut set = Self::new();
        for node in nodes {
            set.insert(node)?;
        }
        Ok(set)
    }

    /// Load every `*.json` file in `dir` as one node each.
    pub fn load_dir(dir: &Path) -> Result<Self, ConfigError> {
        let entries = fs::read_dir(dir).map_err(|source| ConfigError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| ConfigError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let path = entry.path();
            if path.extension().is_some_and(|ext| ext == "json") {
                paths.push(path);
            }
        }
        paths.sort();

        let mut set = Self::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            let node: ConfigNode =
                serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: path.clone(),
                    detail: e.to_string(),
                })?;
            set.insert(node)?;
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Option<&ConfigNode> {
        self.nodes.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
