//! Namespace prefixes and the registry that every other module resolves
//! terms against.

use std::collections::HashMap;

use super::{is_absolute_iri, ModelError};

/// Darwin Core namespace.
pub const DWC: &str = "http://rs.tdwg.org/dwc/terms/";
/// DCMI Metadata Terms namespace.
pub const DCTERMS: &str = "http://purl.org/dc/terms/";
/// RDF namespace.
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
/// RDF Schema namespace.
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
/// OWL namespace.
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
/// XML Schema datatypes namespace (datatype IRIs only, not a registered prefix).
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
/// Default project namespace used for entity-class IRIs and unmapped fields.
pub const DEFAULT_PROJECT_IRI: &str = "https://bgnn.example.org/ns#";
/// Prefix of the project namespace.
pub const PROJECT_PREFIX: &str = "bgnn";

/// The imaging and biodiversity standards adopted for the metadata graph.
/// These rows are always present in a registry and cannot be replaced.
pub const STANDARD_NAMESPACES: [(&str, &str); 11] = [
    ("ac", "http://rs.tdwg.org/ac/terms/"),
    ("crs", "http://ns.adobe.com/camera-raw-settings/1.0/"),
    ("dwc", DWC),
    ("dwciri", "http://rs.tdwg.org/dwc/iri/"),
    ("exif", "http://ns.adobe.com/exif/1.0/"),
    ("Iptc4xmpCore", "http://iptc.org/std/Iptc4xmpCore/1.0/xmlns/"),
    ("photoshop", "http://ns.adobe.com/photoshop/1.0/"),
    ("plus", "http://ns.useplus.org/ldf/xmp/1.0/"),
    ("xmp", "http://ns.adobe.com/xap/1.0/"),
    ("xmpBJ", "http://ns.adobe.com/xap/1.0/bj/"),
    ("xmpMM", "http://ns.adobe.com/xap/1.0/mm/"),
];

/// Supporting vocabularies registered alongside the standards.
pub const SUPPORT_NAMESPACES: [(&str, &str); 4] = [
    ("dcterms", DCTERMS),
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("owl", OWL),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Namespace {
    prefix: String,
    iri: String,
}

impl Namespace {
    pub fn new(prefix: impl Into<String>, iri: impl Into<String>) -> Result<Self, ModelError> {
        let prefix = prefix.into();
        let iri = iri.into();
        if !is_valid_prefix(&prefix) {
            return Err(ModelError::InvalidPrefix(prefix));
        }
        if !is_absolute_iri(&iri) || !(iri.ends_with('/') || iri.ends_with('#')) {
            return Err(ModelError::InvalidNamespaceIri(iri));
        }
        Ok(Namespace { prefix, iri })
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn iri(&self) -> &str {
        &self.iri
    }
}

pub(crate) fn is_valid_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

/// Bidirectional prefix/IRI lookup. Immutable once built; share it behind an
/// `Arc` across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamespaceRegistry {
    entries: Vec<Namespace>,
    by_prefix: HashMap<String, usize>,
    by_iri: HashMap<String, usize>,
    project_prefix: String,
}

impl Default for NamespaceRegistry {
    fn default() -> Self {
        Self::with_project_namespace(DEFAULT_PROJECT_IRI)
            .expect("default project namespace is valid")
    }
}

impl NamespaceRegistry {
    /// A registry seeded with the standards, the support vocabularies and a
    /// project namespace at `project_iri` under the `bgnn` prefix.
    pub fn with_project_namespace(project_iri: &str) -> Result<Self, ModelError> {
        let mut registry = NamespaceRegistry {
            entries: Vec::new(),
            by_prefix: HashMap::new(),
            by_iri: HashMap::new(),
            project_prefix: PROJECT_PREFIX.to_string(),
        };
        for (prefix, iri) in STANDARD_NAMESPACES.iter().chain(SUPPORT_NAMESPACES.iter()) {
            registry.insert(Namespace::new(*prefix, *iri)?)?;
        }
        registry.insert(Namespace::new(PROJECT_PREFIX, project_iri)?)?;
        Ok(registry)
    }

    /// Register an additional namespace. Fails when the prefix or IRI is
    /// already taken, which also protects the seeded rows.
    pub fn register(&mut self, namespace: Namespace) -> Result<(), ModelError> {
        self.insert(namespace)
    }

    fn insert(&mut self, namespace: Namespace) -> Result<(), ModelError> {
        if self.by_prefix.contains_key(namespace.prefix()) {
            return Err(ModelError::DuplicatePrefix(namespace.prefix));
        }
        if self.by_iri.contains_key(namespace.iri()) {
            return Err(ModelError::DuplicateNamespaceIri(namespace.iri));
        }
        let idx = self.entries.len();
        self.by_prefix.insert(namespace.prefix.clone(), idx);
        self.by_iri.insert(namespace.iri.clone(), idx);
        self.entries.push(namespace);
        Ok(())
    }

    pub fn resolve_prefix(&self, prefix: &str) -> Result<&Namespace, ModelError> {
        self.by_prefix
            .get(prefix)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| ModelError::UnknownPrefix(prefix.to_string()))
    }

    pub fn by_iri(&self, iri: &str) -> Option<&Namespace> {
        self.by_iri.get(iri).map(|&i| &self.entries[i])
    }

    pub fn contains_prefix(&self, prefix: &str) -> bool {
        self.by_prefix.contains_key(prefix)
    }

    /// Longest registered namespace IRI that is a string prefix of `iri`.
    pub fn longest_match(&self, iri: &str) -> Option<&Namespace> {
        self.entries
            .iter()
            .filter(|ns| iri.starts_with(ns.iri()))
            .max_by_key(|ns| ns.iri().len())
    }

    pub fn project(&self) -> &Namespace {
        self.resolve_prefix(&self.project_prefix)
            .expect("project namespace is always registered")
    }

    pub fn iter(&self) -> impl Iterator<Item = &Namespace> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
