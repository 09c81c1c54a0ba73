use std::collections::BTreeMap;
use std::fmt;

use crate::error::RegistryError;

/// What a factory constructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactoryKind {
    PolicyBackend,
    TrainerStub,
    DatasetReader,
}

impl fmt::Display for FactoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FactoryKind::PolicyBackend => "policy_backend",
            FactoryKind::TrainerStub => "trainer_stub",
            FactoryKind::DatasetReader => "dataset_reader",
        };
        f.write_str(name)
    }
}

/// A name → constructor-descriptor table, written once at startup and
/// read-only afterwards. `D` is whatever the caller dispatches on —
/// typically a constructor function taking the resolved config.
#[derive(Debug, Clone, Default)]
pub struct FactoryRegistry<D> {
    entries: BTreeMap<(FactoryKind, String), D>,
}

impl<D> FactoryRegistry<D> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Register a descriptor under `(kind, name)`. Re-registering the
    /// same pair is an error rather than a silent replacement.
    pub fn register(
        &mut self,
        kind: FactoryKind,
        name: impl Into<String>,
        descriptor: D,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        if self.entries.contains_key(&(kind, name.clone())) {
            return Err(RegistryError::DuplicateRegistration { kind, name });
        }
        self.entries.insert((kind, name), descriptor);
        Ok(())
    }

    /// Look up a descriptor; an unknown name reports the sorted list of
    /// names registered under that kind.
    pub fn lookup(&self, kind: FactoryKind, name: &str) -> Result<&D, RegistryError> {
        self.entries
            .get(&(kind, name.to_string()))
            .ok_or_else(|| RegistryError::UnknownName {
                kind,
                name: name.to_string(),
                registered: self.names(kind),
            })
    }

    /// All names registered under `kind`, sorted.
    pub fn names(&self, kind: FactoryKind) -> Vec<String> {
        self.entries
            .keys()
            .filter(|(k, _)| *k == kind)
            .map(|(_, name)| name.clone())
            .collect()
    }
}
