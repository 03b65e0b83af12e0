//! Canonical line-oriented serialization, a subset of N-Triples:
//! `<s> <p> o .` with IRI, ARK-IRI or typed-literal objects, lines sorted by
//! byte value.

use std::sync::Arc;

use crate::model::{Datatype, EntityClass, LiteralValue, NamespaceRegistry, Node, Statement, Term};

use super::{vocab, Graph, GraphError};

pub(super) fn render_line(registry: &NamespaceRegistry, stmt: &Statement) -> Result<String, GraphError> {
    let mut line = String::with_capacity(128);
    match stmt.subject() {
        Node::Blank(label) => return Err(GraphError::BlankNodeSubject(label.clone())),
        s => s.write_ntriples(&mut line),
    }
    line.push_str(" <");
    line.push_str(&registry.expand(stmt.predicate())?);
    line.push_str("> ");
    stmt.object().write_ntriples(&mut line);
    line.push_str(" .");
    Ok(line)
}

pub(super) fn serialize(graph: &Graph) -> Result<Vec<u8>, GraphError> {
    let mut lines = graph
        .iter()
        .map(|s| render_line(graph.registry(), s))
        .collect::<Result<Vec<_>, _>>()?;
    lines.sort_unstable();
    let mut out = Vec::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

/// `<class> rdf:type owl:Class` for the five entity classes plus
/// `<ontology> rdf:type owl:Ontology`, the ontology IRI being the project
/// namespace without its trailing `#` or `/`.
pub fn owl_declarations(registry: &NamespaceRegistry) -> Vec<Statement> {
    let rdf_type = vocab::rdf_type();
    let owl = |local: &str| {
        Node::iri(registry.expand(&Term::new("owl", local).expect("static")).expect("owl registered"))
            .expect("absolute")
    };
    let mut out: Vec<Statement> = EntityClass::ALL
        .iter()
        .map(|c| {
            Statement::new(Node::iri(c.iri(registry)).expect("absolute"), rdf_type.clone(), owl("Class"))
                .expect("iri subject")
        })
        .collect();
    let project = registry.project().iri();
    let ontology = project.trim_end_matches(['#', '/']);
    out.push(
        Statement::new(Node::iri(ontology).expect("absolute"), rdf_type, owl("Ontology"))
            .expect("iri subject"),
    );
    out
}

/// Parse canonical (or merely well-formed) serialized bytes back into a
/// graph. Predicates must compact under `registry`.
pub fn parse_serialized(bytes: &[u8], registry: Arc<NamespaceRegistry>) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(bytes).map_err(|e| GraphError::ParseError {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        reason: "invalid UTF-8".into(),
    })?;
    let mut graph = Graph::new(registry);
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let stmt = LineParser::new(line, graph.registry())
            .statement()
            .map_err(|reason| GraphError::ParseError { line: i + 1, reason })?;
        graph.add_statement(stmt)?;
    }
    Ok(graph)
}

struct LineParser<'a> {
    rest: &'a str,
    registry: &'a NamespaceRegistry,
}

impl<'a> LineParser<'a> {
    fn new(line: &'a str, registry: &'a NamespaceRegistry) -> Self {
        LineParser { rest: line, registry }
    }

    fn statement(mut self) -> Result<Statement, String> {
        self.skip_ws();
        let subject = match self.peek() {
            Some('<') => self.iri_node()?,
            Some('_') => self.blank()?,
            _ => return Err("expected subject IRI or blank node".into()),
        };
        self.require_ws()?;
        let predicate_iri = self.iri()?;
        let predicate = self
            .registry
            .compact(&predicate_iri)
            .map_err(|e| e.to_string())?;
        self.require_ws()?;
        let object = match self.peek() {
            Some('<') => self.iri_node()?,
            Some('_') => self.blank()?,
            Some('"') => self.literal()?,
            _ => return Err("expected object".into()),
        };
        self.skip_ws();
        if !self.eat('.') {
            return Err("expected '.'".into());
        }
        self.skip_ws();
        if !self.rest.is_empty() {
            return Err(format!("trailing characters {:?}", self.rest));
        }
        Statement::new(subject, predicate, object).map_err(|e| e.to_string())
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        match self.rest.strip_prefix(c) {
            Some(r) => {
                self.rest = r;
                true
            }
            None => false,
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn require_ws(&mut self) -> Result<(), String> {
        if !self.rest.starts_with([' ', '\t']) {
            return Err("expected whitespace".into());
        }
        self.skip_ws();
        Ok(())
    }

    fn iri(&mut self) -> Result<String, String> {
        if !self.eat('<') {
            return Err("expected '<'".into());
        }
        let end = self.rest.find('>').ok_or("unterminated IRI")?;
        let iri = &self.rest[..end];
        self.rest = &self.rest[end + 1..];
        Ok(iri.to_string())
    }

    fn iri_node(&mut self) -> Result<Node, String> {
        let iri = self.iri()?;
        Node::iri(iri).map_err(|e| e.to_string())
    }

    fn blank(&mut self) -> Result<Node, String> {
        let end = self
            .rest
            .find([' ', '\t'])
            .unwrap_or(self.rest.len());
        let label = &self.rest[..end];
        self.rest = &self.rest[end..];
        Node::blank(label).map_err(|e| e.to_string())
    }

    fn literal(&mut self) -> Result<Node, String> {
        self.eat('"');
        let mut lexical = String::new();
        let mut chars = self.rest.char_indices();
        let end = loop {
            let (i, c) = chars.next().ok_or("unterminated literal")?;
            match c {
                '"' => break i,
                '\\' => {
                    let (_, e) = chars.next().ok_or("dangling escape")?;
                    match e {
                        '\\' => lexical.push('\\'),
                        '"' => lexical.push('"'),
                        'n' => lexical.push('\n'),
                        'r' => lexical.push('\r'),
                        't' => lexical.push('\t'),
                        'u' | 'U' => {
                            let width = if e == 'u' { 4 } else { 8 };
                            let hex: String = (0..width)
                                .map(|_| chars.next().map(|(_, h)| h))
                                .collect::<Option<_>>()
                                .ok_or("short unicode escape")?;
                            let code = u32::from_str_radix(&hex, 16)
                                .map_err(|_| format!("bad unicode escape {hex:?}"))?;
                            lexical.push(char::from_u32(code).ok_or("escape is not a scalar value")?);
                        }
                        other => return Err(format!("unknown escape \\{other}")),
                    }
                }
                c => lexical.push(c),
            }
        };
        self.rest = &self.rest[end + 1..];
        let datatype = if self.rest.starts_with("^^") {
            self.rest = &self.rest[2..];
            let iri = self.iri()?;
            Datatype::from_iri(&iri).ok_or_else(|| format!("unsupported datatype <{iri}>"))?
        } else if self.rest.starts_with('@') {
            return Err("language tags are not supported".into());
        } else {
            Datatype::String
        };
        LiteralValue::new(lexical, datatype)
            .map(Node::Literal)
            .map_err(|e| e.to_string())
    }
}
