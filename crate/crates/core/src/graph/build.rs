use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::ark::{mint, ArkId};
use crate::model::{EntityClass, LiteralValue, NamespaceRegistry, Node, Term};

use super::{vocab, Graph, GraphError};

/// Crosswalked output for one source record, ready to become an entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityInput {
    pub class: EntityClass,
    pub source_key: String,
    /// Key of the Multimedia record this entity belongs to. Defaults to
    /// `source_key` for the image-child classes; ignored otherwise.
    pub parent_key: Option<String>,
    pub pairs: Vec<(Term, LiteralValue)>,
}

impl EntityInput {
    pub fn new(class: EntityClass, source_key: impl Into<String>, pairs: Vec<(Term, LiteralValue)>) -> Self {
        EntityInput {
            class,
            source_key: source_key.into(),
            parent_key: None,
            pairs,
        }
    }

    fn parent_key(&self) -> &str {
        self.parent_key.as_deref().unwrap_or(&self.source_key)
    }
}

type PairSet<'a> = BTreeSet<&'a (Term, LiteralValue)>;

/// Assemble the entity graph. Each (class, key) gets a minted ARK, an
/// `rdf:type`, one statement per pair, `dcterms:isPartOf` to its Multimedia
/// parent for the image-child classes, and every Batch gets
/// `dcterms:hasPart` to every Multimedia.
pub fn build_entity_graph(
    inputs: &[EntityInput],
    naan: &str,
    registry: Arc<NamespaceRegistry>,
) -> Result<Graph, GraphError> {
    // (class, key) -> first input and its pair set; identical repeats are tolerated
    let mut entities: BTreeMap<(EntityClass, &str), (&EntityInput, PairSet)> = BTreeMap::new();
    for input in inputs {
        let pairs: BTreeSet<_> = input.pairs.iter().collect();
        match entities.get(&(input.class, input.source_key.as_str())) {
            Some((prev, prev_pairs)) => {
                if *prev_pairs != pairs || prev.parent_key() != input.parent_key() {
                    return Err(GraphError::DuplicateEntity {
                        class: input.class,
                        key: input.source_key.clone(),
                    });
                }
            }
            None => {
                entities.insert((input.class, input.source_key.as_str()), (input, pairs));
            }
        }
    }

    let mut media: HashMap<&str, ArkId> = HashMap::new();
    for &(class, key) in entities.keys() {
        if class == EntityClass::Multimedia {
            media.insert(key, mint(naan, class, key)?);
        }
    }

    let mut graph = Graph::new(registry);
    let rdf_type = vocab::rdf_type();
    let mut batches = Vec::new();
    for ((class, key), (input, pairs)) in &entities {
        let ark = match class {
            EntityClass::Multimedia => media[key].clone(),
            _ => mint(naan, *class, key)?,
        };
        let subject = Node::Ark(ark.clone());
        let class_iri = Node::iri(class.iri(graph.registry()))?;
        graph.add(subject.clone(), rdf_type.clone(), class_iri)?;
        for (term, value) in pairs {
            graph.add(subject.clone(), term.clone(), Node::Literal(value.clone()))?;
        }
        if class.is_image_child() {
            let parent = media
                .get(input.parent_key())
                .ok_or_else(|| GraphError::OrphanChild {
                    class: *class,
                    key: key.to_string(),
                })?;
            graph.add(subject, vocab::is_part_of(), Node::Ark(parent.clone()))?;
        } else if *class == EntityClass::Batch {
            batches.push(subject);
        }
    }
    let mut media_arks: Vec<&ArkId> = media.values().collect();
    media_arks.sort();
    for batch in batches {
        for ark in &media_arks {
            graph.add(batch.clone(), vocab::has_part(), Node::Ark((*ark).clone()))?;
        }
    }
    Ok(graph)
}

/// Record a rights statement on `subject` as an `rdfs:comment` literal plus
/// a `dcterms:license` IRI.
pub fn attach_rights(graph: &mut Graph, subject: &ArkId, rights_text: &str, license_iri: &str) -> Result<(), GraphError> {
    let node = Node::Ark(subject.clone());
    if graph.about(&node).next().is_none() {
        return Err(GraphError::UnknownSubject(subject.clone()));
    }
    let license = Node::iri(license_iri)?;
    graph.add(node.clone(), vocab::rdfs_comment(), Node::string(rights_text))?;
    graph.add(node, vocab::license(), license)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyViolation {
    /// An image-child entity without exactly one `isPartOf` to a Multimedia.
    ParentCount { ark: ArkId, multimedia_parents: usize },
    /// A Multimedia entity no Batch reaches through `hasPart`.
    Unbatched(ArkId),
    /// An ARK subject without a class.
    Untyped(ArkId),
}

/// Structural checks on a built graph. `require_batch` demands every
/// Multimedia be reachable from some Batch.
pub fn topology_violations(graph: &Graph, require_batch: bool) -> Vec<TopologyViolation> {
    let mut out: Vec<TopologyViolation> = graph
        .untyped_subjects()
        .into_iter()
        .map(TopologyViolation::Untyped)
        .collect();
    let is_part_of = vocab::is_part_of();
    let has_part = vocab::has_part();
    let entities = graph.entities();
    let mut batched = BTreeSet::new();
    for (ark, class) in &entities {
        if *class == EntityClass::Batch {
            let subject = Node::Ark(ark.clone());
            batched.extend(graph.objects(&subject, &has_part).filter_map(Node::as_ark).cloned());
        }
    }
    for (ark, class) in &entities {
        let subject = Node::Ark(ark.clone());
        if class.is_image_child() {
            let parents = graph
                .objects(&subject, &is_part_of)
                .filter_map(Node::as_ark)
                .filter(|p| graph.class_of(p) == Some(EntityClass::Multimedia))
                .count();
            let all = graph.objects(&subject, &is_part_of).count();
            if parents != 1 || all != 1 {
                out.push(TopologyViolation::ParentCount {
                    ark: ark.clone(),
                    multimedia_parents: parents,
                });
            }
        } else if *class == EntityClass::Multimedia && require_batch && !batched.contains(ark) {
            out.push(TopologyViolation::Unbatched(ark.clone()));
        }
    }
    out
}
