//! The entity-attribute-value statement store.
//!
//! A [`Graph`] is a set of [`Statement`]s indexed by subject, by predicate
//! and by (predicate, object). [`SharedGraph`] wraps one behind a
//! copy-on-write snapshot so readers never wait on a writer.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use indexmap::IndexSet;
use thiserror::Error;

use crate::ark::{ArkError, ArkId};
use crate::model::{EntityClass, ModelError, NamespaceRegistry, Node, Statement, Term};

mod build;
mod entity;
mod ntriples;
mod query;

pub use build::{attach_rights, build_entity_graph, topology_violations, EntityInput, TopologyViolation};
pub use entity::EntityNode;
pub use ntriples::{owl_declarations, parse_serialized};
pub use query::{parse_query, Binding, PatternTerm, Query, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("no entity {0} in graph")]
    UnknownSubject(ArkId),
    #[error("{class} record {key:?} has no Multimedia parent")]
    OrphanChild { class: EntityClass, key: String },
    #[error("{class} record {key:?} asserted twice with different statements")]
    DuplicateEntity { class: EntityClass, key: String },
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("selected variable ?{0} appears in no pattern")]
    UnboundSelect(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("blank node subject {0} cannot be serialized")]
    BlankNodeSubject(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ark(#[from] ArkError),
}

/// Predicates the store itself writes.
pub mod vocab {
    use crate::model::Term;

    fn term(prefix: &str, local: &str) -> Term {
        Term::new(prefix, local).expect("static term")
    }

    pub fn rdf_type() -> Term {
        term("rdf", "type")
    }
    pub fn rdfs_comment() -> Term {
        term("rdfs", "comment")
    }
    pub fn license() -> Term {
        term("dcterms", "license")
    }
    pub fn is_part_of() -> Term {
        term("dcterms", "isPartOf")
    }
    pub fn has_part() -> Term {
        term("dcterms", "hasPart")
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    registry: Arc<NamespaceRegistry>,
    statements: IndexSet<Statement>,
    by_subject: HashMap<Node, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_predicate_object: HashMap<(Term, Node), Vec<usize>>,
}

impl PartialEq for Graph {
    /// Statement-set equality.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|s| other.contains(s))
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new(registry: Arc<NamespaceRegistry>) -> Self {
        Graph {
            registry,
            statements: IndexSet::new(),
            by_subject: HashMap::new(),
            by_predicate: HashMap::new(),
            by_predicate_object: HashMap::new(),
        }
    }

    pub fn registry(&self) -> &Arc<NamespaceRegistry> {
        &self.registry
    }

    /// Set insertion. Returns whether the statement was new.
    pub fn add_statement(&mut self, stmt: Statement) -> Result<bool, GraphError> {
        if !self.registry.contains_prefix(stmt.predicate().prefix()) {
            return Err(GraphError::UnknownPrefix(stmt.predicate().prefix().to_string()));
        }
        if self.statements.contains(&stmt) {
            return Ok(false);
        }
        let idx = self.statements.len();
        self.by_subject.entry(stmt.subject().clone()).or_default().push(idx);
        self.by_predicate.entry(stmt.predicate().clone()).or_default().push(idx);
        self.by_predicate_object
            .entry((stmt.predicate().clone(), stmt.object().clone()))
            .or_default()
            .push(idx);
        self.statements.insert(stmt);
        Ok(true)
    }

    /// Convenience wrapper building the statement first.
    pub fn add(&mut self, subject: Node, predicate: Term, object: Node) -> Result<bool, GraphError> {
        self.add_statement(Statement::new(subject, predicate, object)?)
    }

    pub fn contains(&self, stmt: &Statement) -> bool {
        self.statements.contains(stmt)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Statements in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter()
    }

    fn lookup<'a>(&'a self, idx: Option<&'a Vec<usize>>) -> impl Iterator<Item = &'a Statement> + 'a {
        idx.into_iter()
            .flatten()
            .map(move |&i| &self.statements[i])
    }

    pub fn about<'a>(&'a self, subject: &Node) -> impl Iterator<Item = &'a Statement> + 'a {
        self.lookup(self.by_subject.get(subject))
    }

    pub fn with_predicate<'a>(&'a self, predicate: &Term) -> impl Iterator<Item = &'a Statement> + 'a {
        self.lookup(self.by_predicate.get(predicate))
    }

    pub fn with_predicate_object<'a>(
        &'a self,
        predicate: &Term,
        object: &Node,
    ) -> impl Iterator<Item = &'a Statement> + 'a {
        let hits = self
            .by_predicate_object
            .get(&(predicate.clone(), object.clone()));
        self.lookup(hits)
    }

    pub fn objects<'a>(&'a self, subject: &Node, predicate: &'a Term) -> impl Iterator<Item = &'a Node> + 'a {
        self.about(subject)
            .filter(move |s| s.predicate() == predicate)
            .map(Statement::object)
    }

    /// Distinct subject nodes, unordered.
    pub fn subjects(&self) -> impl Iterator<Item = &Node> {
        self.by_subject.keys()
    }

    /// The class asserted by an `rdf:type` statement, if any.
    pub fn class_of(&self, ark: &ArkId) -> Option<EntityClass> {
        let rdf_type = vocab::rdf_type();
        let subject = Node::Ark(ark.clone());
        let found = self.objects(&subject, &rdf_type).find_map(|o| match o {
            Node::Iri(iri) => EntityClass::from_iri(&self.registry, iri),
            _ => None,
        });
        found
    }

    /// Every ARK-identified subject with a class, sorted by ARK.
    pub fn entities(&self) -> Vec<(ArkId, EntityClass)> {
        let mut out: Vec<(ArkId, EntityClass)> = self
            .by_subject
            .keys()
            .filter_map(|n| n.as_ark())
            .filter_map(|a| self.class_of(a).map(|c| (a.clone(), c)))
            .collect();
        out.sort();
        out
    }

    pub fn entity(&self, ark: &ArkId) -> Option<EntityNode> {
        EntityNode::from_graph(self, ark)
    }

    /// ARK subjects lacking an `rdf:type` statement.
    pub fn untyped_subjects(&self) -> Vec<ArkId> {
        let mut out: Vec<ArkId> = self
            .by_subject
            .keys()
            .filter_map(|n| n.as_ark())
            .filter(|a| self.class_of(a).is_none())
            .cloned()
            .collect();
        out.sort();
        out
    }

    /// A new graph holding the statements `keep` accepts.
    pub fn filter(&self, mut keep: impl FnMut(&Statement) -> bool) -> Graph {
        let mut g = Graph::new(self.registry.clone());
        for s in self.iter().filter(|s| keep(s)) {
            g.add_statement(s.clone()).expect("prefix already validated");
        }
        g
    }

    /// Canonical N-Triples rendering of one statement, without newline.
    pub fn render_statement(&self, stmt: &Statement) -> Result<String, GraphError> {
        ntriples::render_line(&self.registry, stmt)
    }

    /// Canonical bytes: one statement per line, byte-sorted, each line
    /// newline-terminated. The empty graph serializes to nothing.
    pub fn serialize(&self) -> Result<Vec<u8>, GraphError> {
        ntriples::serialize(self)
    }

    /// The canonical serialization plus the class and ontology declarations.
    pub fn to_owl(&self) -> Result<Vec<u8>, GraphError> {
        let mut g = self.clone();
        for decl in owl_declarations(&self.registry) {
            g.add_statement(decl)?;
        }
        g.serialize()
    }
}

/// A graph behind an atomically swappable snapshot. Readers clone an `Arc`;
/// writers copy on write when a snapshot is still shared.
#[derive(Debug)]
pub struct SharedGraph {
    current: RwLock<Arc<Graph>>,
}

impl SharedGraph {
    pub fn new(graph: Graph) -> Self {
        SharedGraph {
            current: RwLock::new(Arc::new(graph)),
        }
    }

    pub fn snapshot(&self) -> Arc<Graph> {
        self.current.read().expect("graph lock poisoned").clone()
    }

    pub fn replace(&self, graph: Graph) {
        *self.current.write().expect("graph lock poisoned") = Arc::new(graph);
    }

    pub fn update<T>(&self, f: impl FnOnce(&mut Graph) -> T) -> T {
        let mut guard = self.current.write().expect("graph lock poisoned");
        f(Arc::make_mut(&mut guard))
    }
}
