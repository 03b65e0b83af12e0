//! Exhaustive-assignment evaluator for basic graph patterns, independent of
//! the store's indexes and join planner, plus a random query generator.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use specimeta_core::graph::{Binding, Graph, PatternTerm, Query, TriplePattern};
use specimeta_core::model::Node;

type Triple = (Node, Node, Node);

fn triples(graph: &Graph) -> HashSet<Triple> {
    graph
        .iter()
        .map(|s| {
            let p = graph.registry().expand(s.predicate()).expect("registered predicate");
            (s.subject().clone(), Node::Iri(p), s.object().clone())
        })
        .collect()
}

fn vars_of(query: &Query) -> Vec<String> {
    let mut seen = BTreeSet::new();
    for p in query.patterns() {
        for t in [&p.subject, &p.predicate, &p.object] {
            if let PatternTerm::Var(v) = t {
                seen.insert(v.clone());
            }
        }
    }
    seen.into_iter().collect()
}

/// Values a variable may take: the intersection, over each position the
/// variable occupies, of the values found at that position in the graph.
fn domain(var: &str, query: &Query, all: &HashSet<Triple>) -> Vec<Node> {
    let mut dom: Option<BTreeSet<Node>> = None;
    for p in query.patterns() {
        for (i, t) in [&p.subject, &p.predicate, &p.object].into_iter().enumerate() {
            if matches!(t, PatternTerm::Var(v) if v == var) {
                let here: BTreeSet<Node> = all
                    .iter()
                    .map(|(s, p, o)| match i {
                        0 => s.clone(),
                        1 => p.clone(),
                        _ => o.clone(),
                    })
                    .collect();
                dom = Some(match dom {
                    None => here,
                    Some(d) => d.intersection(&here).cloned().collect(),
                });
            }
        }
    }
    dom.unwrap_or_default().into_iter().collect()
}

fn resolve<'a>(t: &'a PatternTerm, vars: &[String], values: &'a [Node]) -> Option<&'a Node> {
    match t {
        PatternTerm::Const(n) => Some(n),
        PatternTerm::Var(v) => {
            let i = vars.iter().position(|x| x == v)?;
            values.get(i)
        }
    }
}

fn holds(p: &TriplePattern, vars: &[String], values: &[Node], all: &HashSet<Triple>) -> Option<bool> {
    let s = resolve(&p.subject, vars, values)?;
    let pr = resolve(&p.predicate, vars, values)?;
    let o = resolve(&p.object, vars, values)?;
    Some(all.contains(&(s.clone(), pr.clone(), o.clone())))
}

fn search(
    depth: usize,
    vars: &[String],
    domains: &[Vec<Node>],
    values: &mut Vec<Node>,
    query: &Query,
    all: &HashSet<Triple>,
    out: &mut BTreeSet<Vec<String>>,
) {
    // A pattern whose variables are all assigned must already hold.
    if query
        .patterns()
        .iter()
        .any(|p| holds(p, vars, values, all) == Some(false))
    {
        return;
    }
    if depth == vars.len() {
        let row = query
            .select()
            .iter()
            .map(|v| values[vars.iter().position(|x| x == v).expect("selected var")].to_ntriples())
            .collect();
        out.insert(row);
        return;
    }
    for value in &domains[depth] {
        values.push(value.clone());
        search(depth + 1, vars, domains, values, query, all, out);
        values.pop();
    }
}

/// Distinct projected rows, each the N-Triples renderings in select order,
/// sorted.
pub fn brute_force(graph: &Graph, query: &Query) -> Vec<Vec<String>> {
    let all = triples(graph);
    let vars = vars_of(query);
    let domains: Vec<Vec<Node>> = vars.iter().map(|v| domain(v, query, &all)).collect();
    let mut out = BTreeSet::new();
    search(0, &vars, &domains, &mut Vec::new(), query, &all, &mut out);
    out.into_iter().collect()
}

/// Engine results in the oracle's shape.
pub fn rows(query: &Query, results: &[Binding]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = results
        .iter()
        .map(|b| query.select().iter().map(|v| b[v].to_ntriples()).collect())
        .collect();
    out.sort();
    out
}

const VARS: [&str; 3] = ["a", "b", "c"];

/// Up to three patterns over up to three variables. Constants are mostly
/// taken from the graph so that results are usually non-empty.
pub fn random_query(rng: &mut impl Rng, graph: &Graph) -> Query {
    let stmts: Vec<Triple> = {
        let mut v: Vec<Triple> = triples(graph).into_iter().collect();
        v.sort();
        v
    };
    loop {
        let n = rng.gen_range(1..=3);
        let mut patterns = Vec::with_capacity(n);
        for _ in 0..n {
            let anchor = if stmts.is_empty() {
                None
            } else {
                Some(&stmts[rng.gen_range(0..stmts.len())])
            };
            let mut pick = |i: usize| -> PatternTerm {
                if rng.gen_bool(0.55) {
                    return PatternTerm::var(VARS[rng.gen_range(0..VARS.len())]);
                }
                match (anchor, rng.gen_bool(0.9)) {
                    (Some((s, p, o)), true) => PatternTerm::Const([s, p, o][i].clone()),
                    _ => PatternTerm::Const(match i {
                        1 => Node::Iri("http://rs.tdwg.org/dwc/terms/absent".into()),
                        _ => Node::string("absent"),
                    }),
                }
            };
            patterns.push(TriplePattern::new(pick(0), pick(1), pick(2)));
        }
        let select: Vec<String> = if rng.gen_bool(0.5) {
            Vec::new()
        } else {
            VARS.iter().filter(|_| rng.gen_bool(0.6)).map(|v| v.to_string()).collect()
        };
        if let Ok(q) = Query::new(patterns, select) {
            return q;
        }
    }
}
