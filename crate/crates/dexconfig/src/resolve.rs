use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::ConfigError;
use crate::node::{is_known_section, ConfigNode, NodeSet};

/// A fully merged view of one inheritance chain, plus per-field
/// provenance: for every leaf field, the dotted path (e.g.
/// `optimizer.lr`) maps to the name of the node that supplied its
/// value (`"cli"` for `--set` overrides).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolvedConfig {
    sections: BTreeMap<String, Map<String, Value>>,
    provenance: BTreeMap<String, String>,
}

/// Resolve `name` against `nodes`: walk its parent chain from base to
/// leaf, deep-merging nested maps and replacing scalars and lists.
pub fn resolve_config(name: &str, nodes: &NodeSet) -> Result<ResolvedConfig, ConfigError> {
    let chain = inheritance_chain(name, nodes)?;
    let mut resolved = ResolvedConfig::default();
    for node in chain {
        for (section, fields) in &node.sections {
            // Nodes built in code may not have gone through validate().
            if !is_known_section(section) {
                return Err(ConfigError::UnknownSection {
                    origin: node.name.clone(),
                    section: section.clone(),
                });
            }
            let dest = resolved.sections.entry(section.clone()).or_default();
            merge_map(dest, fields, section, &node.name, &mut resolved.provenance);
        }
    }
    Ok(resolved)
}

/// Follow parent links from `name` upward, returning the chain in
/// base-first order. A repeated name along the walk is a cycle.
fn inheritance_chain<'a>(
    name: &str,
    nodes: &'a NodeSet,
) -> Result<Vec<&'a ConfigNode>, ConfigError> {
    let mut walked: Vec<&ConfigNode> = Vec::new();
    let mut current = name.to_string();
    let mut first = true;
    loop {
        if walked.iter().any(|n| n.name == current) {
            let mut path: Vec<String> = walked.iter().map(|n| n.name.clone()).collect();
            path.push(current);
            return Err(ConfigError::CycleDetected { path });
        }
        let node = match nodes.get(&current) {
            Some(node) => node,
            None if first => return Err(ConfigError::UnknownRoot(current)),
            None => {
                let child = walked.last().expect("non-first step has a child");
                return Err(ConfigError::UnknownParent {
                    node: child.name.clone(),
                    parent: current,
                });
            }
        };
        walked.push(node);
        first = false;
        match &node.parent {
            Some(parent) => current = parent.clone(),
            None => break,
        }
    }
    walked.reverse();
    Ok(walked)
}

/// Merge `src` into `dest` under `prefix`. Objects merge key by key;
/// anything else (scalar, string, list, or a type change) replaces the
/// previous value wholesale and re-stamps provenance beneath it.
fn merge_map(
    dest: &mut Map<String, Value>,
    src: &Map<String, Value>,
    prefix: &str,
    origin: &str,
    provenance: &mut BTreeMap<String, String>,
) {
    for (key, value) in src {
        let path = format!("{prefix}.{key}");
        match (dest.get_mut(key), value) {
            (Some(Value::Object(d)), Value::Object(s)) => {
                // An empty map counts as a leaf; once it gains children
                // its own provenance marker must go.
                if d.is_empty() && !s.is_empty() {
                    provenance.remove(&path);
                }
                merge_map(d, s, &path, origin, provenance);
            }
            _ => {
                strip_provenance(provenance, &path);
                dest.insert(key.clone(), value.clone());
                record_leaves(provenance, &path, value, origin);
            }
        }
    }
}

/// Drop provenance entries at `path` and below.
fn strip_provenance(provenance: &mut BTreeMap<String, String>, path: &str) {
    let prefix = format!("{path}.");
    provenance.retain(|p, _| p != path && !p.starts_with(&prefix));
}

/// Stamp `origin` on every leaf under `path`. A non-empty object
/// recurses; everything else (including an empty object) is a leaf.
fn record_leaves(
    provenance: &mut BTreeMap<String, String>,
    path: &str,
    value: &Value,
    origin: &str,
) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (key, child) in map {
                record_leaves(provenance, &format!("{path}.{key}"), child, origin);
            }
        }
        _ => {
            provenance.insert(path.to_string(), origin.to_string());
        }
    }
}

impl ResolvedConfig {
    pub fn sections(&self) -> &BTreeMap<String, Map<String, Value>> {
        &self.sections
    }

    pub fn provenance(&self) -> &BTreeMap<String, String> {
        &self.provenance
    }

    /// Look up a value by dotted path, e.g. `optimizer.lr`.
    pub fn get(&self, path: &str) -> Option<&Value> {
        let mut segments = path.split('.');
        let section = self.sections.get(segments.next()?)?;
        let mut current = section.get(segments.next()?)?;
        for segment in segments {
            current = current.as_object()?.get(segment)?;
        }
        Some(current)
    }

    /// Fetch a string-valued field, e.g. the trainer or backend name.
    pub fn get_str(&self, path: &str) -> Option<&str> {
        self.get(path)?.as_str()
    }

    /// Apply one `section.key=value` override at highest precedence.
    /// The value parses as JSON when it can (numbers, bools, lists,
    /// quoted strings) and falls back to a plain string; provenance is
    /// recorded as `"cli"`.
    pub fn apply_set(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (path, raw) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        let segments: Vec<&str> = path.split('.').collect();
        if segments.len() < 2 || segments.iter().any(|s| s.is_empty()) {
            return Err(ConfigError::BadOverride(spec.to_string()));
        }
        if !is_known_section(segments[0]) {
            return Err(ConfigError::UnknownSection {
                origin: "cli".to_string(),
                section: segments[0].to_string(),
            });
        }
        let value: Value =
            serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

        let mut current = self.sections.entry(segments[0].to_string()).or_default();
        let mut walked = segments[0].to_string();
        for segment in &segments[1..segments.len() - 1] {
            walked = format!("{walked}.{segment}");
            let slot = current
                .entry(segment.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            if !slot.is_object() {
                // Descending through a scalar: the override wins, so the
                // scalar becomes a map and its old provenance goes away.
                strip_provenance(&mut self.provenance, &walked);
                *slot = Value::Object(Map::new());
            } else if slot.as_object().is_some_and(Map::is_empty) {
                // Same for an empty map about to gain its first child.
                self.provenance.remove(&walked);
            }
            current = slot.as_object_mut().expect("just ensured object");
        }

        let leaf = segments[segments.len() - 1];
        strip_provenance(&mut self.provenance, path);
        current.insert(leaf.to_string(), value.clone());
        record_leaves(&mut self.provenance, path, &value, "cli");
        Ok(())
    }

    /// The resolved view as a JSON value: `{"provenance": .., "sections": ..}`.
    pub fn to_json(&self) -> Value {
        json!({
            "sections": self.sections,
            "provenance": self.provenance,
        })
    }
}
