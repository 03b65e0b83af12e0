use std::fmt;
use std::str::FromStr;

use super::namespace::{is_valid_prefix, NamespaceRegistry};
use super::ModelError;

/// A prefixed name such as `dwc:genus`. Local names are case-sensitive and
/// kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    prefix: String,
    local: String,
}

impl Term {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Result<Self, ModelError> {
        let prefix = prefix.into();
        let local = local.into();
        if !is_valid_prefix(&prefix) {
            return Err(ModelError::InvalidPrefix(prefix));
        }
        if !is_valid_local_name(&local) {
            return Err(ModelError::InvalidLocalName(local));
        }
        Ok(Term { prefix, local })
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local_name(&self) -> &str {
        &self.local
    }
}

pub(crate) fn is_valid_local_name(local: &str) -> bool {
    let mut chars = local.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Term {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, local) = s
            .split_once(':')
            .ok_or_else(|| ModelError::InvalidTerm(s.to_string()))?;
        Term::new(prefix, local).map_err(|_| ModelError::InvalidTerm(s.to_string()))
    }
}

impl NamespaceRegistry {
    /// Parse `prefix:local` and check the prefix is registered.
    pub fn term(&self, text: &str) -> Result<Term, ModelError> {
        let term: Term = text.parse()?;
        self.resolve_prefix(term.prefix())?;
        Ok(term)
    }

    pub fn expand(&self, term: &Term) -> Result<String, ModelError> {
        let ns = self.resolve_prefix(term.prefix())?;
        Ok(format!("{}{}", ns.iri(), term.local_name()))
    }

    /// Inverse of [`expand`](Self::expand). The longest registered namespace
    /// wins, so `.../xap/1.0/mm/X` compacts to `xmpMM:X` rather than `xmp`.
    pub fn compact(&self, iri: &str) -> Result<Term, ModelError> {
        let ns = self
            .longest_match(iri)
            .ok_or_else(|| ModelError::UncompactableIri(iri.to_string()))?;
        let local = &iri[ns.iri().len()..];
        Term::new(ns.prefix(), local).map_err(|_| ModelError::UncompactableIri(iri.to_string()))
    }
}
