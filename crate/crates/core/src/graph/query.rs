//! Conjunctive basic-graph-pattern queries.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Datatype, LiteralValue, NamespaceRegistry, Node, Statement, Term};

use super::{vocab, Graph, GraphError};

/// Variable name (without `?`) to bound value. Predicates bind as
/// [`Node::Iri`] holding the expanded IRI.
pub type Binding = BTreeMap<String, Node>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Const(Node),
}

impl PatternTerm {
    pub fn var(name: &str) -> PatternTerm {
        PatternTerm::Var(name.trim_start_matches('?').to_string())
    }

    fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    patterns: Vec<TriplePattern>,
    select: Vec<String>,
}

fn valid_var(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

impl Query {
    /// An empty `select` projects every variable.
    pub fn new(patterns: Vec<TriplePattern>, select: Vec<String>) -> Result<Query, GraphError> {
        if patterns.is_empty() {
            return Err(GraphError::InvalidQuery("no patterns".into()));
        }
        let mut bound = BTreeSet::new();
        for p in &patterns {
            for v in p.vars() {
                if !valid_var(v) {
                    return Err(GraphError::InvalidQuery(format!("bad variable name ?{v}")));
                }
                bound.insert(v.to_string());
            }
            if let PatternTerm::Const(c) = &p.predicate {
                if !matches!(c, Node::Iri(_)) {
                    return Err(GraphError::InvalidQuery(format!(
                        "predicate must be an IRI, got {}",
                        c.to_ntriples()
                    )));
                }
            }
        }
        let select: Vec<String> = select
            .into_iter()
            .map(|s| s.trim_start_matches('?').to_string())
            .collect();
        if let Some(missing) = select.iter().find(|s| !bound.contains(*s)) {
            return Err(GraphError::UnboundSelect(missing.clone()));
        }
        let select = if select.is_empty() { bound.into_iter().collect() } else { select };
        Ok(Query { patterns, select })
    }

    pub fn patterns(&self) -> &[TriplePattern] {
        &self.patterns
    }

    /// Projected variables, without `?`.
    pub fn select(&self) -> &[String] {
        &self.select
    }
}

struct Evaluator<'g> {
    graph: &'g Graph,
    order: Vec<&'g TriplePattern>,
    select: &'g [String],
    found: BTreeSet<Vec<(String, Node)>>,
}

impl Graph {
    /// Every distinct projected binding satisfying all patterns, sorted by
    /// the N-Triples rendering of the values in variable-name order.
    pub fn query(&self, query: &Query) -> Vec<Binding> {
        let mut ev = Evaluator {
            graph: self,
            order: plan(&query.patterns),
            select: &query.select,
            found: BTreeSet::new(),
        };
        let mut binding = Binding::new();
        ev.search(0, &mut binding);
        let mut keyed: Vec<(Vec<String>, Binding)> = ev
            .found
            .into_iter()
            .map(|row| {
                let b: Binding = row.into_iter().collect();
                let key = b.values().map(Node::to_ntriples).collect();
                (key, b)
            })
            .collect();
        keyed.sort();
        keyed.into_iter().map(|(_, b)| b).collect()
    }
}

/// Greedy join order: repeatedly take the pattern with the most positions
/// fixed by constants or already-bound variables.
fn plan(patterns: &[TriplePattern]) -> Vec<&TriplePattern> {
    let mut remaining: Vec<&TriplePattern> = patterns.iter().collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let score = |p: &TriplePattern| {
            let fixed = |t: &PatternTerm| match t {
                PatternTerm::Const(_) => true,
                PatternTerm::Var(v) => bound.contains(v.as_str()),
            };
            // subject and (predicate, object) are the indexed access paths
            let s = fixed(&p.subject) as u8 * 4;
            let po = (fixed(&p.predicate) && fixed(&p.object)) as u8 * 3;
            let pr = fixed(&p.predicate) as u8;
            s + po + pr
        };
        let (best, _) = remaining
            .iter()
            .enumerate()
            .max_by_key(|(i, p)| (score(p), std::cmp::Reverse(*i)))
            .expect("non-empty");
        let chosen = remaining.remove(best);
        bound.extend(chosen.vars());
        order.push(chosen);
    }
    order
}

impl<'g> Evaluator<'g> {
    fn resolve(&self, term: &PatternTerm, binding: &Binding) -> Option<Node> {
        match term {
            PatternTerm::Const(c) => Some(c.clone()),
            PatternTerm::Var(v) => binding.get(v).cloned(),
        }
    }

    fn search(&mut self, depth: usize, binding: &mut Binding) {
        let Some(pattern) = self.order.get(depth).copied() else {
            let row = self
                .select
                .iter()
                .map(|v| (v.clone(), binding[v].clone()))
                .collect();
            self.found.insert(row);
            return;
        };
        let s = self.resolve(&pattern.subject, binding);
        let p = self.resolve(&pattern.predicate, binding);
        let o = self.resolve(&pattern.object, binding);
        let registry = self.graph.registry();
        let p_term = match &p {
            Some(Node::Iri(iri)) => match registry.compact(iri) {
                Ok(t) => Some(t),
                Err(_) => return,
            },
            Some(_) => return,
            None => None,
        };
        let graph = self.graph;
        let candidates: Vec<&Statement> = match (&s, &p_term, &o) {
            (Some(s), _, _) => graph.about(s).collect(),
            (None, Some(p), Some(o)) => graph.with_predicate_object(p, o).collect(),
            (None, Some(p), None) => graph.with_predicate(p).collect(),
            (None, None, _) => graph.iter().collect(),
        };
        for stmt in candidates {
            if p_term.as_ref().is_some_and(|t| t != stmt.predicate()) {
                continue;
            }
            let Ok(pred_iri) = registry.expand(stmt.predicate()) else {
                continue;
            };
            let values = [stmt.subject().clone(), Node::Iri(pred_iri), stmt.object().clone()];
            let mut added: Vec<&str> = Vec::new();
            let mut ok = true;
            for (term, value) in pattern.positions().into_iter().zip(values) {
                match term {
                    PatternTerm::Const(c) => {
                        if *c != value {
                            ok = false;
                        }
                    }
                    PatternTerm::Var(v) => match binding.get(v) {
                        Some(existing) => {
                            if *existing != value {
                                ok = false;
                            }
                        }
                        None => {
                            binding.insert(v.clone(), value);
                            added.push(v);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.search(depth + 1, binding);
            }
            for v in added {
                binding.remove(v);
            }
        }
    }
}

/// Parse whitespace-separated `s p o` triples, optionally separated by `.`.
/// Terms are `?var`, `<iri>`, `prefix:local`, `ark:/…`, `"literal"` with an
/// optional `^^<datatype>` or `^^prefix:local`, or `a` for `rdf:type`.
pub fn parse_query(text: &str, registry: &NamespaceRegistry) -> Result<Query, GraphError> {
    let tokens = tokenize(text)?;
    let mut patterns = Vec::new();
    let mut current: Vec<PatternTerm> = Vec::with_capacity(3);
    for token in tokens {
        match token {
            Token::Dot => {
                if !current.is_empty() {
                    return Err(GraphError::InvalidQuery("'.' inside a pattern".into()));
                }
            }
            Token::Word(w) => current.push(word_term(&w, current.len(), registry)?),
            Token::Literal { lexical, datatype } => {
                let dt = match datatype {
                    None => Datatype::String,
                    Some(dt) => {
                        let iri = match dt.strip_prefix('<').and_then(|d| d.strip_suffix('>')) {
                            Some(iri) => iri.to_string(),
                            None => registry.expand(&registry.term(&dt)?)?,
                        };
                        Datatype::from_iri(&iri)
                            .ok_or_else(|| GraphError::InvalidQuery(format!("unsupported datatype <{iri}>")))?
                    }
                };
                let lit = LiteralValue::new(lexical, dt)?;
                current.push(PatternTerm::Const(Node::Literal(lit)));
            }
        }
        if current.len() == 3 {
            let mut it = current.drain(..);
            let (s, p, o) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            drop(it);
            patterns.push(TriplePattern::new(s, p, o));
        }
    }
    if !current.is_empty() {
        return Err(GraphError::InvalidQuery(format!(
            "incomplete pattern: {} of 3 terms",
            current.len()
        )));
    }
    Query::new(patterns, Vec::new())
}

fn word_term(word: &str, position: usize, registry: &NamespaceRegistry) -> Result<PatternTerm, GraphError> {
    if let Some(name) = word.strip_prefix('?') {
        if !valid_var(name) {
            return Err(GraphError::InvalidQuery(format!("bad variable name {word}")));
        }
        return Ok(PatternTerm::Var(name.to_string()));
    }
    if position == 1 && word == "a" {
        return Ok(PatternTerm::Const(Node::Iri(registry.expand(&vocab::rdf_type())?)));
    }
    if let Some(iri) = word.strip_prefix('<').and_then(|w| w.strip_suffix('>')) {
        let node = if position == 1 { Node::Iri(iri.to_string()) } else { Node::iri(iri)? };
        return Ok(PatternTerm::Const(node));
    }
    if word.starts_with("ark:/") {
        let ark: crate::ark::ArkId = word.parse()?;
        return Ok(PatternTerm::Const(Node::Ark(ark)));
    }
    let term: Term = registry.term(word).map_err(|e| match e {
        crate::model::ModelError::UnknownPrefix(p) => GraphError::UnknownPrefix(p),
        other => GraphError::Model(other),
    })?;
    let iri = registry.expand(&term)?;
    let node = if position == 1 { Node::Iri(iri) } else { Node::iri(iri)? };
    Ok(PatternTerm::Const(node))
}

#[derive(Debug, PartialEq)]
enum Token {
    Word(String),
    Literal { lexical: String, datatype: Option<String> },
    Dot,
}

fn tokenize(text: &str) -> Result<Vec<Token>, GraphError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut lexical = String::new();
            loop {
                match chars.next() {
                    None => return Err(GraphError::InvalidQuery("unterminated literal".into())),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => lexical.push('\n'),
                        Some('r') => lexical.push('\r'),
                        Some('t') => lexical.push('\t'),
                        Some('"') => lexical.push('"'),
                        Some('\\') => lexical.push('\\'),
                        other => {
                            return Err(GraphError::InvalidQuery(format!("bad escape \\{}", other.unwrap_or(' '))))
                        }
                    },
                    Some(ch) => lexical.push(ch),
                }
            }
            let datatype = if chars.peek() == Some(&'^') {
                chars.next();
                if chars.next() != Some('^') {
                    return Err(GraphError::InvalidQuery("expected ^^ after literal".into()));
                }
                Some(take_word(&mut chars))
            } else {
                None
            };
            out.push(Token::Literal { lexical, datatype });
        } else {
            let word = take_word(&mut chars);
            if word == "." {
                out.push(Token::Dot);
            } else if let Some(w) = word.strip_suffix('.').filter(|w| !w.is_empty() && !w.starts_with('<')) {
                // "?o." at the end of a pattern
                out.push(Token::Word(w.to_string()));
                out.push(Token::Dot);
            } else {
                out.push(Token::Word(word));
            }
        }
    }
    Ok(out)
}

fn take_word(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> String {
    let mut word = String::new();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            break;
        }
        word.push(c);
        chars.next();
    }
    word
}
