use crate::ark::ArkId;
use crate::model::{EntityClass, Node, Statement};

use super::{vocab, Graph};

/// One ARK-identified entity and the statements made about it, in
/// canonical (rendered, byte-sorted) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityNode {
    pub ark: ArkId,
    pub class: EntityClass,
    pub statements: Vec<Statement>,
    pub parent: Option<ArkId>,
}

impl EntityNode {
    pub(super) fn from_graph(graph: &Graph, ark: &ArkId) -> Option<EntityNode> {
        let class = graph.class_of(ark)?;
        let subject = Node::Ark(ark.clone());
        let mut keyed: Vec<(String, Statement)> = graph
            .about(&subject)
            .map(|s| {
                let line = graph.render_statement(s).expect("ARK subjects always render");
                (line, s.clone())
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let is_part_of = vocab::is_part_of();
        let parent = keyed
            .iter()
            .find(|(_, s)| s.predicate() == &is_part_of)
            .and_then(|(_, s)| s.object().as_ark().cloned());
        Some(EntityNode {
            ark: ark.clone(),
            class,
            statements: keyed.into_iter().map(|(_, s)| s).collect(),
            parent,
        })
    }

    /// Non-blank values of `predicate`.
    pub fn values<'a>(&'a self, predicate: &'a crate::model::Term) -> impl Iterator<Item = &'a Node> + 'a {
        self.statements
            .iter()
            .filter(move |s| s.predicate() == predicate)
            .map(Statement::object)
            .filter(|o| o.as_literal().is_none_or(|l| !l.is_blank()))
    }

    pub fn first_text(&self, predicate: &crate::model::Term) -> Option<String> {
        self.values(predicate).next().map(Node::text)
    }
}
