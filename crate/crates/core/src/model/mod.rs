//! Shared vocabulary: namespaces, terms, typed literals, graph nodes,
//! statements and the closed set of entity classes.

use thiserror::Error;

mod class;
mod literal;
pub mod namespace;
mod statement;
mod term;

pub use class::EntityClass;
pub use literal::{Datatype, LiteralValue};
pub use namespace::{Namespace, NamespaceRegistry};
pub use statement::{Node, Statement};
pub use term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("IRI {0:?} is not under any registered namespace")]
    UncompactableIri(String),
    #[error("invalid prefix {0:?}")]
    InvalidPrefix(String),
    #[error("invalid local name {0:?}")]
    InvalidLocalName(String),
    #[error("invalid prefixed term {0:?}")]
    InvalidTerm(String),
    #[error("namespace IRI {0:?} must be absolute and end in '/' or '#'")]
    InvalidNamespaceIri(String),
    #[error("prefix {0:?} is already registered")]
    DuplicatePrefix(String),
    #[error("namespace IRI {0:?} is already registered")]
    DuplicateNamespaceIri(String),
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("unknown datatype {0:?}")]
    UnknownDatatype(String),
    #[error("{lexical:?} is not a valid {datatype}")]
    InvalidLexical { lexical: String, datatype: Datatype },
    #[error("unknown entity class {0:?}")]
    UnknownClass(String),
    #[error("a literal cannot be a statement subject")]
    LiteralSubject,
}

/// Absolute-form sanity check: a scheme, a colon, and a non-empty remainder
/// free of whitespace and the characters N-Triples forbids inside `<...>`.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let mut sc = scheme.chars();
    matches!(sc.next(), Some(c) if c.is_ascii_alphabetic())
        && sc.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !rest.chars().any(|c| {
            c.is_whitespace()
                || c.is_control()
                || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_iris() {
        assert!(is_absolute_iri("http://rs.tdwg.org/dwc/terms/"));
        assert!(is_absolute_iri("urn:uuid:1234"));
        assert!(is_absolute_iri("ark:/99999/fk4"));
        assert!(!is_absolute_iri("relative/path"));
        assert!(!is_absolute_iri("http:"));
        assert!(!is_absolute_iri("1http://x"));
        assert!(!is_absolute_iri("http://x y"));
        assert!(!is_absolute_iri("http://x>"));
    }
}
