//! Layered experiment configuration: inheritance, overrides, factories.
//!
//! An experiment is described by a chain of declarative config nodes.
//! Each node is one JSON document with a `name`, an optional `parent`
//! and a `sections` map over the fixed section set
//! `{trainer, data, optimizer, model, inference, action, tokenizer}`.
//! Resolving a node walks its chain from base to leaf: nested maps
//! deep-merge key by key, while scalars and lists replace wholesale.
//! The resolved view records per-field provenance (which node supplied
//! each leaf value), and `--set`-style overrides apply on top with
//! provenance `"cli"`.
//!
//! The crate also provides [`FactoryRegistry`], a write-once name →
//! descriptor table used to dispatch resolved configs onto concrete
//! policy backends, trainer stubs and dataset readers.

mod error;
mod node;
mod registry;
mod resolve;

pub use error::{ConfigError, RegistryError};
pub use node::{ConfigNode, NodeSet, SECTION_NAMES};
pub use registry::{FactoryKind, FactoryRegistry};
pub use resolve::{resolve_config, ResolvedConfig};
