use std::fmt::Write as _;

use crate::ark::ArkId;

use super::literal::{Datatype, LiteralValue};
use super::term::Term;
use super::{is_absolute_iri, ModelError};

/// A value that can sit in the subject or object position of a statement,
/// or be bound to a query variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Ark(ArkId),
    Iri(String),
    Blank(String),
    Literal(LiteralValue),
}

impl Node {
    /// IRI node; resolver IRIs carrying a well-formed ARK become [`Node::Ark`].
    pub fn iri(iri: impl Into<String>) -> Result<Node, ModelError> {
        let iri = iri.into();
        if !is_absolute_iri(&iri) {
            return Err(ModelError::InvalidIri(iri));
        }
        match ArkId::from_iri(&iri) {
            Some(Ok(ark)) => Ok(Node::Ark(ark)),
            Some(Err(_)) => Err(ModelError::InvalidIri(iri)),
            None => Ok(Node::Iri(iri)),
        }
    }

    pub fn blank(label: impl Into<String>) -> Result<Node, ModelError> {
        let label = label.into();
        let ok = label
            .strip_prefix("_:")
            .is_some_and(|l| !l.is_empty() && l.bytes().all(|b| b.is_ascii_alphanumeric()));
        if !ok {
            return Err(ModelError::InvalidBlankNode(label));
        }
        Ok(Node::Blank(label))
    }

    pub fn string(lexical: impl Into<String>) -> Node {
        Node::Literal(LiteralValue::string(lexical))
    }

    pub fn as_ark(&self) -> Option<&ArkId> {
        match self {
            Node::Ark(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&LiteralValue> {
        match self {
            Node::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// Plain text form: the lexical value, the IRI, or the canonical ARK.
    pub fn text(&self) -> String {
        match self {
            Node::Ark(a) => a.to_string(),
            Node::Iri(i) => i.clone(),
            Node::Blank(b) => b.clone(),
            Node::Literal(l) => l.lexical().to_string(),
        }
    }

    /// N-Triples rendering appended to `out`.
    pub fn write_ntriples(&self, out: &mut String) {
        match self {
            Node::Ark(a) => {
                let _ = write!(out, "<{}>", a.to_iri());
            }
            Node::Iri(i) => {
                out.push('<');
                out.push_str(i);
                out.push('>');
            }
            Node::Blank(b) => out.push_str(b),
            Node::Literal(l) => {
                out.push('"');
                escape_literal(l.lexical(), out);
                out.push('"');
                if l.datatype() != Datatype::String {
                    out.push_str("^^<");
                    out.push_str(&l.datatype().iri());
                    out.push('>');
                }
            }
        }
    }

    pub fn to_ntriples(&self) -> String {
        let mut s = String::new();
        self.write_ntriples(&mut s);
        s
    }
}

impl From<ArkId> for Node {
    fn from(ark: ArkId) -> Self {
        Node::Ark(ark)
    }
}

impl From<LiteralValue> for Node {
    fn from(lit: LiteralValue) -> Self {
        Node::Literal(lit)
    }
}

fn escape_literal(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// One entity-attribute-value fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    subject: Node,
    predicate: Term,
    object: Node,
}

impl Statement {
    /// Literal subjects are rejected; everything else is checked by the
    /// node constructors.
    pub fn new(subject: Node, predicate: Term, object: Node) -> Result<Self, ModelError> {
        if matches!(subject, Node::Literal(_)) {
            return Err(ModelError::LiteralSubject);
        }
        Ok(Statement {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Node {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Node {
        &self.object
    }
}
