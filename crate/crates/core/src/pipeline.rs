//! Ingest, crosswalk and graph assembly over a set of source tables.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::crosswalk::{apply_rules, RuleSet, WalkOutput};
use crate::graph::{build_entity_graph, EntityInput, Graph, GraphError};
use crate::ingest::{parse_record_table, IngestError, RejectedRow};
use crate::model::{EntityClass, NamespaceRegistry, Term};
use crate::validate::{completeness, default_required, validate_label, EntityReport, LabelText, Thresholds, ValidateError};

pub const DEFAULT_KEY_COLUMN: &str = "SourceKey";
pub const LABEL_COLUMN: &str = "labelText";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{source_name}: {error}")]
    Ingest { source_name: String, error: IngestError },
    #[error("{0}: no rule set matches its columns")]
    Unclassified(String),
    #[error("{source_name}: columns match several rule sets ({candidates})")]
    Ambiguous { source_name: String, candidates: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
}

/// One delivered table. Without an explicit rule set the table is matched
/// to the rule set covering most of its columns.
#[derive(Debug, Clone, Copy)]
pub struct SourceInput<'a> {
    pub name: &'a str,
    pub bytes: &'a [u8],
    pub ruleset: Option<&'a RuleSet>,
}

impl<'a> SourceInput<'a> {
    pub fn new(name: &'a str, bytes: &'a [u8]) -> Self {
        SourceInput {
            name,
            bytes,
            ruleset: None,
        }
    }
}

/// Pick the rule set whose patterns match the most columns, ignoring the
/// key column. Ties and zero matches are errors.
pub fn classify<'r>(
    source_name: &str,
    columns: &[String],
    key_column: &str,
    rulesets: &'r [RuleSet],
) -> Result<&'r RuleSet, PipelineError> {
    let key = key_column.trim().to_lowercase();
    let scores: Vec<usize> = rulesets
        .iter()
        .map(|rs| {
            columns
                .iter()
                .filter(|c| c.trim().to_lowercase() != key && rs.rule_for(c).is_some())
                .count()
        })
        .collect();
    let best = scores.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return Err(PipelineError::Unclassified(source_name.to_string()));
    }
    let winners: Vec<&RuleSet> = rulesets
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s == best)
        .map(|(r, _)| r)
        .collect();
    match winners.as_slice() {
        [one] => Ok(one),
        many => Err(PipelineError::Ambiguous {
            source_name: source_name.to_string(),
            candidates: many
                .iter()
                .map(|r| r.target_class().to_string())
                .collect::<Vec<_>>()
                .join(", "),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkedRecord {
    pub class: EntityClass,
    pub source_name: String,
    pub source_id: String,
    pub field_count: usize,
    pub output: WalkOutput,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub graph: Graph,
    pub records: Vec<WalkedRecord>,
    /// (source name, row) pairs rejected during ingest.
    pub rejected: Vec<(String, RejectedRow)>,
}

impl PipelineRun {
    /// Crosswalk issues per entity, keyed by (class, source id).
    pub fn issues_by_entity(&self) -> HashMap<(EntityClass, &str), &WalkOutput> {
        self.records
            .iter()
            .map(|r| ((r.class, r.source_id.as_str()), &r.output))
            .collect()
    }

    pub fn issue_count(&self) -> usize {
        self.records.iter().map(|r| r.output.issues.len()).sum()
    }
}

/// Walked records and the (source name, row) pairs rejected during ingest.
pub type Walked = (Vec<WalkedRecord>, Vec<(String, RejectedRow)>);

/// Ingest and crosswalk every source without building a graph. Returns the
/// walked records and the rows rejected during ingest.
pub fn walk_sources(
    sources: &[SourceInput<'_>],
    rulesets: &[RuleSet],
    key_column: &str,
    registry: &NamespaceRegistry,
) -> Result<Walked, PipelineError> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for source in sources {
        let delivery = parse_record_table(source.bytes, key_column, source.name).map_err(|error| {
            PipelineError::Ingest {
                source_name: source.name.to_string(),
                error,
            }
        })?;
        let ruleset = match source.ruleset {
            Some(rs) => rs,
            None => classify(source.name, &delivery.columns, key_column, rulesets)?,
        };
        for record in &delivery.records {
            records.push(WalkedRecord {
                class: ruleset.target_class(),
                source_name: source.name.to_string(),
                source_id: record.source_id.clone(),
                field_count: record.fields.len(),
                output: apply_rules(ruleset, registry, record),
            });
        }
        rejected.extend(delivery.rejected.into_iter().map(|r| (source.name.to_string(), r)));
    }
    Ok((records, rejected))
}

pub fn run_pipeline(
    sources: &[SourceInput<'_>],
    rulesets: &[RuleSet],
    key_column: &str,
    naan: &str,
    registry: Arc<NamespaceRegistry>,
) -> Result<PipelineRun, PipelineError> {
    let (records, rejected) = walk_sources(sources, rulesets, key_column, &registry)?;
    let inputs: Vec<EntityInput> = records
        .iter()
        .map(|r| EntityInput::new(r.class, r.source_id.clone(), r.output.pairs.clone()))
        .collect();
    let graph = build_entity_graph(&inputs, naan, registry)?;
    Ok(PipelineRun {
        graph,
        records,
        rejected,
    })
}

/// `SourceKey,labelText` table as key → text.
pub fn parse_labels(bytes: &[u8], key_column: &str) -> Result<BTreeMap<String, String>, PipelineError> {
    let wrap = |error| PipelineError::Ingest {
        source_name: "labels".into(),
        error,
    };
    let delivery = parse_record_table(bytes, key_column, "labels").map_err(wrap)?;
    let mut out = BTreeMap::new();
    for record in delivery.records {
        let text = record
            .fields
            .iter()
            .find(|f| f.name.trim().eq_ignore_ascii_case(LABEL_COLUMN))
            .map(|f| f.value.clone())
            .ok_or_else(|| wrap(IngestError::MissingHeader(format!("no column named {LABEL_COLUMN:?}"))))?;
        out.insert(record.source_id, text);
    }
    Ok(out)
}

fn identifier() -> Term {
    Term::new("dcterms", "identifier").expect("static term")
}

/// Label validation and completeness for every CollectionEvent, in ARK
/// order. Events are matched to labels through their `dcterms:identifier`;
/// events without a label get a completeness-only report. An empty label
/// is an error.
pub fn validate_events(
    graph: &Graph,
    labels: &BTreeMap<String, String>,
    fields: &[Term],
    thresholds: Thresholds,
    run: Option<&PipelineRun>,
) -> Result<Vec<EntityReport>, PipelineError> {
    let issues = run.map(PipelineRun::issues_by_entity).unwrap_or_default();
    let required = default_required(EntityClass::CollectionEvent);
    let id = identifier();
    let mut out = Vec::new();
    for (ark, class) in graph.entities() {
        if class != EntityClass::CollectionEvent {
            continue;
        }
        let event = graph.entity(&ark).expect("listed entity");
        let key = event.first_text(&id);
        let validation = match key.as_ref().and_then(|k| labels.get(k)) {
            Some(text) => Some(validate_label(&LabelText::new(text.as_str()), &event, fields, thresholds)?),
            None => None,
        };
        let walk_issues = key
            .as_deref()
            .and_then(|k| issues.get(&(class, k)))
            .map(|w| w.issues.clone())
            .unwrap_or_default();
        out.push(EntityReport {
            ark: ark.clone(),
            validation,
            quality: completeness(&event, &required, walk_issues),
        });
    }
    Ok(out)
}
