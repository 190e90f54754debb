use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Abs, Atom, AtomError, Box01, EqZero, Linear, Log1pExp, LogSumExp, NonNeg, NonPos, Norm2, Square, Zero};
use crate::scalar::Scalar;

/// Shared handle to an atom.
pub type AtomRef<T> = Arc<dyn Atom<T>>;

/// Registry mapping string names to atoms.
#[derive(Clone, Debug)]
pub struct AtomCatalog<T: Scalar> {
    registry: BTreeMap<String, AtomRef<T>>,
}

impl<T: Scalar> Default for AtomCatalog<T> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<T: Scalar> AtomCatalog<T> {
    pub fn empty() -> Self {
        Self {
            registry: BTreeMap::new(),
        }
    }

    /// The shipped atoms.
    pub fn standard() -> Self {
        let mut c = Self::empty();
        c.register(Arc::new(Square));
        c.register(Arc::new(Abs));
        c.register(Arc::new(Linear));
        c.register(Arc::new(Log1pExp));
        c.register(Arc::new(LogSumExp));
        c.register(Arc::new(Norm2));
        c.register(Arc::new(Box01));
        c.register(Arc::new(NonNeg));
        c.register(Arc::new(NonPos));
        c.register(Arc::new(EqZero));
        c.register(Arc::new(Zero));
        c
    }

    /// Registers `atom` under its own name, replacing any previous entry.
    pub fn register(&mut self, atom: AtomRef<T>) {
        self.registry.insert(atom.name().to_string(), atom);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registry.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<AtomRef<T>, AtomError> {
        self.registry.get(name).cloned().ok_or_else(|| {
            let suggestion = self
                .names()
                .map(|k| (strsim::levenshtein(name, k), k))
                .filter(|(d, _)| *d <= 3)
                .min()
                .map(|(_, k)| k.to_string());
            AtomError::Unknown {
                name: name.to_string(),
                suggestion,
                known: self.names().map(str::to_string).collect(),
            }
        })
    }
}

/// Looks `name` up in the standard catalog.
pub fn catalog_lookup<T: Scalar>(name: &str) -> Result<AtomRef<T>, AtomError> {
    AtomCatalog::standard().get(name)
}
