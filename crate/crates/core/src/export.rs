//! Distribution bundles: per-entity CSV and XML metadata, citation text and
//! the OWL graph, packed into a byte-reproducible zip.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Cursor, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipWriter};

use crate::ark::ArkId;
use crate::graph::{vocab, EntityNode, Graph, GraphError};
use crate::model::{NamespaceRegistry, Node, Term};

pub const METADATA_CSV: &str = "metadata.csv";
pub const CITATION_TXT: &str = "citation.txt";
pub const GRAPH_OWL: &str = "graph.owl";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("no entity {0} in graph")]
    UnknownRoot(ArkId),
    #[error("two entities map to bundle path {0}")]
    DuplicatePath(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("zip: {0}")]
    Zip(#[from] zip::result::ZipError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Header `ark` plus the sorted union of predicates other than `rdf:type`;
/// one row per entity in ARK order; multiple values joined with `|` in
/// sorted order.
pub fn render_csv(entities: &[EntityNode]) -> Vec<u8> {
    let rdf_type = vocab::rdf_type();
    let mut rows: Vec<(&ArkId, BTreeMap<String, Vec<String>>)> = entities
        .iter()
        .map(|e| {
            let mut cells: BTreeMap<String, Vec<String>> = BTreeMap::new();
            for s in e.statements.iter().filter(|s| s.predicate() != &rdf_type) {
                cells.entry(s.predicate().to_string()).or_default().push(s.object().text());
            }
            (&e.ark, cells)
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0));
    let columns: BTreeSet<&String> = rows.iter().flat_map(|(_, c)| c.keys()).collect();

    let mut out = String::new();
    let mut header = vec!["ark"];
    header.extend(columns.iter().map(|c| c.as_str()));
    crate::csv::write_row(&mut out, &header);
    for (ark, cells) in &rows {
        let mut row = vec![ark.to_string()];
        for col in &columns {
            row.push(match cells.get(*col) {
                Some(values) => {
                    let mut values = values.clone();
                    values.sort();
                    values.join("|")
                }
                None => String::new(),
            });
        }
        crate::csv::write_row(&mut out, &row);
    }
    out.into_bytes()
}

fn xml_escape(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\r' => out.push_str("&#13;"),
            '\t' | '\n' => out.push(c),
            // not representable in XML 1.0
            c if (c as u32) < 0x20 || c == '\u{fffe}' || c == '\u{ffff}' => out.push('\u{fffd}'),
            c => out.push(c),
        }
    }
}

/// `<record ark="…">` with one `<prefix:local>` child per statement, in the
/// entity's canonical statement order.
pub fn render_xml(entity: &EntityNode, registry: &NamespaceRegistry) -> Result<Vec<u8>, ExportError> {
    let prefixes: BTreeSet<&str> = entity.statements.iter().map(|s| s.predicate().prefix()).collect();
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<record ark=\"");
    xml_escape(&entity.ark.to_string(), &mut out);
    out.push('"');
    for prefix in prefixes {
        let ns = registry.resolve_prefix(prefix).map_err(GraphError::from)?;
        out.push_str(" xmlns:");
        out.push_str(prefix);
        out.push_str("=\"");
        xml_escape(ns.iri(), &mut out);
        out.push('"');
    }
    out.push_str(">\n");
    for s in &entity.statements {
        let name = s.predicate().to_string();
        out.push_str("  <");
        out.push_str(&name);
        out.push('>');
        xml_escape(&s.object().text(), &mut out);
        out.push_str("</");
        out.push_str(&name);
        out.push_str(">\n");
    }
    out.push_str("</record>\n");
    Ok(out.into_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub len: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub root: ArkId,
    /// Sorted by path.
    pub entries: Vec<(String, Vec<u8>)>,
    pub manifest: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The root and everything below it: `hasPart` objects and `isPartOf`
/// subjects, followed transitively. Sorted by ARK.
pub fn descendants(graph: &Graph, root: &ArkId) -> Vec<ArkId> {
    let has_part = vocab::has_part();
    let is_part_of = vocab::is_part_of();
    let mut seen = BTreeSet::from([root.clone()]);
    let mut stack = vec![root.clone()];
    while let Some(ark) = stack.pop() {
        let node = Node::Ark(ark);
        let down = graph.objects(&node, &has_part).filter_map(Node::as_ark);
        let up = graph
            .with_predicate_object(&is_part_of, &node)
            .filter_map(|s| s.subject().as_ark());
        for next in down.chain(up) {
            if seen.insert(next.clone()) {
                stack.push(next.clone());
            }
        }
    }
    seen.into_iter().filter(|a| graph.class_of(a).is_some()).collect()
}

pub fn build_bundle(graph: &Graph, root: &ArkId, citation_text: &str) -> Result<Bundle, ExportError> {
    if graph.class_of(root).is_none() {
        return Err(ExportError::UnknownRoot(root.clone()));
    }
    let selected = descendants(graph, root);
    let entities: Vec<EntityNode> = selected
        .iter()
        .map(|a| graph.entity(a).expect("selected entities are typed"))
        .collect();

    let mut entries: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    entries.insert(METADATA_CSV.into(), render_csv(&entities));
    for e in &entities {
        let path = format!("{}.xml", e.ark.file_stem());
        let xml = render_xml(e, graph.registry())?;
        if entries.insert(path.clone(), xml).is_some() {
            return Err(ExportError::DuplicatePath(path));
        }
    }
    let mut citation = citation_text.to_string();
    if !citation.is_empty() && !citation.ends_with('\n') {
        citation.push('\n');
    }
    for a in &selected {
        citation.push_str(&format!("ARK: {a}\n"));
    }
    entries.insert(CITATION_TXT.into(), citation.into_bytes());
    let selected_nodes: BTreeSet<Node> = selected.iter().cloned().map(Node::Ark).collect();
    let subgraph = graph.filter(|s| selected_nodes.contains(s.subject()));
    entries.insert(GRAPH_OWL.into(), subgraph.to_owl()?);

    let manifest = entries
        .iter()
        .map(|(path, bytes)| ManifestEntry {
            path: path.clone(),
            len: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        })
        .collect();
    Ok(Bundle {
        root: root.clone(),
        entries: entries.into_iter().collect(),
        manifest,
    })
}

impl Bundle {
    /// Stored (uncompressed) entries in path order, all stamped
    /// 1980-01-01 00:00, so equal bundles give equal bytes.
    pub fn to_zip(&self) -> Result<Vec<u8>, ExportError> {
        let options = SimpleFileOptions::default()
            .compression_method(CompressionMethod::Stored)
            .last_modified_time(zip::DateTime::default())
            .unix_permissions(0o644);
        let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
        for (path, bytes) in &self.entries {
            zip.start_file(path.as_str(), options)?;
            zip.write_all(bytes)?;
        }
        Ok(zip.finish()?.into_inner())
    }

    pub fn entry(&self, path: &str) -> Option<&[u8]> {
        self.entries
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, b)| b.as_slice())
    }

    /// Whether every manifest digest matches its entry.
    pub fn verify_manifest(&self) -> bool {
        self.manifest.len() == self.entries.len()
            && self.manifest.iter().zip(&self.entries).all(|(m, (path, bytes))| {
                m.path == *path && m.len == bytes.len() as u64 && m.sha256 == sha256_hex(bytes)
            })
    }
}

/// Compacted predicate terms used by `entities`, excluding `rdf:type`.
pub fn csv_columns(entities: &[EntityNode]) -> Vec<Term> {
    let rdf_type = vocab::rdf_type();
    let set: BTreeSet<&Term> = entities
        .iter()
        .flat_map(|e| e.statements.iter().map(|s| s.predicate()))
        .filter(|p| **p != rdf_type)
        .collect();
    let mut out: Vec<Term> = set.into_iter().cloned().collect();
    out.sort_by_key(|t| t.to_string());
    out
}

#[cfg(test)]
mod tests {
    use std::io::Read;
    use std::sync::Arc;

    use super::*;
    use crate::ark::{mint, DEFAULT_NAAN};
    use crate::graph::{build_entity_graph, parse_serialized, EntityInput};
    use crate::model::{EntityClass, LiteralValue};

    fn reg() -> Arc<NamespaceRegistry> {
        Arc::new(NamespaceRegistry::default())
    }

    fn pairs(items: &[(&str, &str)]) -> Vec<(Term, LiteralValue)> {
        items
            .iter()
            .map(|(t, v)| (t.parse().unwrap(), LiteralValue::string(*v)))
            .collect()
    }

    fn sample() -> Graph {
        build_entity_graph(
            &[
                EntityInput::new(EntityClass::Multimedia, "k", pairs(&[("dcterms:format", "image/jpeg")])),
                EntityInput::new(
                    EntityClass::CollectionEvent,
                    "k",
                    pairs(&[("dwc:genus", "Carassius"), ("dwc:specificEpithet", "auratus")]),
                ),
                EntityInput::new(EntityClass::Multimedia, "other", pairs(&[("dcterms:format", "image/png")])),
            ],
            DEFAULT_NAAN,
            reg(),
        )
        .unwrap()
    }

    fn ark(class: EntityClass, key: &str) -> ArkId {
        mint(DEFAULT_NAAN, class, key).unwrap()
    }

    fn entity(g: &Graph, class: EntityClass, key: &str) -> EntityNode {
        g.entity(&ark(class, key)).unwrap()
    }

    #[test]
    fn csv_single_column() {
        let g = build_entity_graph(
            &[
                EntityInput::new(EntityClass::Multimedia, "k", vec![]),
                EntityInput::new(EntityClass::CollectionEvent, "k", pairs(&[("dwc:genus", "Carassius")])),
            ],
            DEFAULT_NAAN,
            reg(),
        )
        .unwrap();
        let mut e = entity(&g, EntityClass::CollectionEvent, "k");
        e.statements.retain(|s| s.predicate().prefix() != "dcterms");
        let csv = String::from_utf8(render_csv(&[e.clone()])).unwrap();
        assert_eq!(csv, format!("ark,dwc:genus\r\n{},Carassius\r\n", e.ark));
    }

    #[test]
    fn csv_union_and_sorted_multivalue() {
        let mut g = Graph::new(reg());
        let a = Node::Ark(ark(EntityClass::Multimedia, "a"));
        let b = Node::Ark(ark(EntityClass::Multimedia, "b"));
        let class = Node::iri(EntityClass::Multimedia.iri(g.registry())).unwrap();
        for n in [&a, &b] {
            g.add(n.clone(), vocab::rdf_type(), class.clone()).unwrap();
        }
        let subject: Term = "dcterms:subject".parse().unwrap();
        g.add(a.clone(), subject.clone(), Node::string("b")).unwrap();
        g.add(a.clone(), subject, Node::string("a")).unwrap();
        g.add(b.clone(), "dcterms:format".parse().unwrap(), Node::string("x,y")).unwrap();
        let ents = vec![g.entity(b.as_ark().unwrap()).unwrap(), g.entity(a.as_ark().unwrap()).unwrap()];
        let csv = String::from_utf8(render_csv(&ents)).unwrap();
        let mut expected = [
            (a.as_ark().unwrap().to_string(), ",a|b".to_string()),
            (b.as_ark().unwrap().to_string(), "\"x,y\",".to_string()),
        ];
        expected.sort();
        let body: String = expected.iter().map(|(k, v)| format!("{k},{v}\r\n")).collect();
        assert_eq!(csv, format!("ark,dcterms:format,dcterms:subject\r\n{body}"));
    }

    #[test]
    fn xml_rendering() {
        let g = sample();
        let e = entity(&g, EntityClass::CollectionEvent, "k");
        let xml = String::from_utf8(render_xml(&e, g.registry()).unwrap()).unwrap();
        assert!(xml.contains("<dwc:genus>Carassius</dwc:genus>"));
        assert!(xml.contains("xmlns:dwc=\"http://rs.tdwg.org/dwc/terms/\""));
        assert_eq!(render_xml(&e, g.registry()).unwrap(), xml.as_bytes());

        let mut g2 = Graph::new(reg());
        let n = Node::Ark(ark(EntityClass::Multimedia, "x"));
        g2.add(n.clone(), vocab::rdf_type(), Node::iri(EntityClass::Multimedia.iri(g2.registry())).unwrap())
            .unwrap();
        g2.add(n.clone(), "dcterms:title".parse().unwrap(), Node::string("a<b & \"c\"\u{1}"))
            .unwrap();
        let xml = String::from_utf8(render_xml(&g2.entity(n.as_ark().unwrap()).unwrap(), g2.registry()).unwrap()).unwrap();
        assert!(xml.contains("<dcterms:title>a&lt;b &amp; &quot;c&quot;\u{fffd}</dcterms:title>"));
    }

    #[test]
    fn bundle_for_multimedia_root() {
        let g = sample();
        let root = ark(EntityClass::Multimedia, "k");
        let b = build_bundle(&g, &root, "Cite as: Example Fish Images.").unwrap();
        let paths: Vec<&str> = b.entries.iter().map(|(p, _)| p.as_str()).collect();
        assert_eq!(paths.len(), 5);
        assert!(paths.contains(&"metadata.csv") && paths.contains(&"citation.txt") && paths.contains(&"graph.owl"));
        assert_eq!(paths.iter().filter(|p| p.ends_with(".xml")).count(), 2);
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(paths, sorted);
        assert!(b.verify_manifest());

        let citation = String::from_utf8(b.entry(CITATION_TXT).unwrap().to_vec()).unwrap();
        assert!(citation.starts_with("Cite as: Example Fish Images.\nARK: ark:/99999/"));
        assert_eq!(citation.lines().count(), 3);

        // selected: root (2 statements) + child (4 statements)
        let owl = b.entry(GRAPH_OWL).unwrap();
        let parsed = parse_serialized(owl, reg()).unwrap();
        assert_eq!(parsed.len(), 2 + 4 + 6);
        assert_eq!(parsed.serialize().unwrap(), owl);
    }

    #[test]
    fn bundle_zip_is_reproducible() {
        let g = sample();
        let root = ark(EntityClass::Multimedia, "k");
        let z1 = build_bundle(&g, &root, "c").unwrap().to_zip().unwrap();
        let z2 = build_bundle(&g.clone(), &root, "c").unwrap().to_zip().unwrap();
        assert_eq!(z1, z2);
        let mut archive = zip::ZipArchive::new(Cursor::new(z1)).unwrap();
        assert_eq!(archive.len(), 5);
        let mut f = archive.by_name("metadata.csv").unwrap();
        let mut text = String::new();
        f.read_to_string(&mut text).unwrap();
        assert!(text.starts_with("ark,"));
        assert_eq!(f.last_modified().unwrap(), zip::DateTime::default());
    }

    #[test]
    fn unknown_root() {
        let g = sample();
        let absent = ark(EntityClass::Multimedia, "absent");
        assert!(matches!(build_bundle(&g, &absent, ""), Err(ExportError::UnknownRoot(a)) if a == absent));
    }

    #[test]
    fn batch_root_reaches_everything() {
        let g = build_entity_graph(
            &[
                EntityInput::new(EntityClass::Multimedia, "a", vec![]),
                EntityInput::new(EntityClass::Multimedia, "b", vec![]),
                EntityInput::new(EntityClass::IQMetadata, "a", vec![]),
                EntityInput::new(EntityClass::Batch, "B", pairs(&[("dcterms:title", "t")])),
            ],
            DEFAULT_NAAN,
            reg(),
        )
        .unwrap();
        let root = ark(EntityClass::Batch, "B");
        assert_eq!(descendants(&g, &root).len(), 4);
        let b = build_bundle(&g, &root, "").unwrap();
        assert_eq!(b.entries.len(), 3 + 4);
        let citation = std::str::from_utf8(b.entry(CITATION_TXT).unwrap()).unwrap();
        assert_eq!(citation.lines().count(), 4);
        assert_eq!(csv_columns(&[g.entity(&root).unwrap()]).len(), 2);
    }
}
