use std::path::PathBuf;

use thiserror::Error;

use crate::registry::FactoryKind;

/// Errors from loading node files, walking inheritance chains and
/// applying overrides.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("invalid node: {0}")]
    InvalidNode(String),

    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),

    #[error("no node named `{0}`")]
    UnknownRoot(String),

    #[error("node `{node}` names unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },

    #[error("inheritance cycle: {}", path.join(" -> "))]
    CycleDetected { path: Vec<String> },

    #[error("unknown section `{section}` in `{origin}`")]
    UnknownSection { origin: String, section: String },

    #[error("bad override `{0}`: expected section.key=value")]
    BadOverride(String),
}

/// Errors from the factory registry.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("duplicate {kind} factory `{name}`")]
    DuplicateRegistration { kind: FactoryKind, name: String },

    #[error("no {kind} factory named `{name}` (registered: {})", fmt_names(registered))]
    UnknownName {
        kind: FactoryKind,
        name: String,
        registered: Vec<String>,
    },
}

fn fmt_names(names: &[String]) -> String {
    if names.is_empty() {
        "none".to_string()
    } else {
        names.join(", ")
    }
}
