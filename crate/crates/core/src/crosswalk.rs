//! Field-name crosswalks from delivered column names to registered terms.
//!
//! A rule file is a CSV with header `sourcePattern,action,target,datatype,note`
//! whose first data row is `@class,,<EntityClass>,,...`. Patterns match raw
//! field names case-insensitively after trimming and collapsing internal
//! whitespace. Fields no rule covers are kept under the project namespace.

use std::collections::HashMap;

use thiserror::Error;

use crate::csv;
use crate::ingest::{coerce_value, SourceRecord};
use crate::model::{Datatype, EntityClass, LiteralValue, ModelError, NamespaceRegistry, Term};

const RULE_HEADER: [&str; 5] = ["sourcePattern", "action", "target", "datatype", "note"];
const CLASS_DECLARATION: &str = "@class";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrosswalkError {
    #[error("rule syntax error on line {line}: {reason}")]
    RuleSyntax { line: usize, reason: String },
    #[error("duplicate source pattern {pattern:?} on line {line}")]
    DuplicatePattern { pattern: String, line: usize },
    #[error("unknown prefix {prefix:?} on line {line}")]
    UnknownPrefix { prefix: String, line: usize },
    #[error("first rule row must be an @class declaration")]
    MissingClassDeclaration,
    #[error("target {target} on line {line} would be re-mapped by another rule's pattern")]
    TargetShadowsPattern { target: String, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleAction {
    MapTo { term: Term, datatype: Datatype },
    Drop { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosswalkRule {
    pub source_pattern: String,
    pub action: RuleAction,
    pub note: String,
}

/// Lowercased, trimmed, internal whitespace collapsed to single spaces.
pub fn normalize_field_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Rules for one metadata source, attached to one entity class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<CrosswalkRule>,
    target_class: EntityClass,
    by_pattern: HashMap<String, usize>,
    target_datatypes: HashMap<Term, Datatype>,
}

impl RuleSet {
    pub fn new(
        target_class: EntityClass,
        rules: Vec<CrosswalkRule>,
        registry: &NamespaceRegistry,
    ) -> Result<Self, CrosswalkError> {
        // line numbers as if loaded from a file: header 1, @class 2
        Self::build(target_class, rules.into_iter().zip(3..).collect(), registry)
    }

    fn build(
        target_class: EntityClass,
        rules: Vec<(CrosswalkRule, usize)>,
        registry: &NamespaceRegistry,
    ) -> Result<Self, CrosswalkError> {
        let mut by_pattern = HashMap::new();
        let mut target_datatypes = HashMap::new();
        for (idx, (rule, line)) in rules.iter().enumerate() {
            let pattern = normalize_field_name(&rule.source_pattern);
            if pattern.is_empty() {
                return Err(CrosswalkError::RuleSyntax {
                    line: *line,
                    reason: "empty sourcePattern".into(),
                });
            }
            if by_pattern.insert(pattern.clone(), idx).is_some() {
                return Err(CrosswalkError::DuplicatePattern {
                    pattern: rule.source_pattern.clone(),
                    line: *line,
                });
            }
            if let RuleAction::MapTo { term, datatype } = &rule.action {
                registry
                    .resolve_prefix(term.prefix())
                    .map_err(|_| CrosswalkError::UnknownPrefix {
                        prefix: term.prefix().to_string(),
                        line: *line,
                    })?;
                let known = *target_datatypes.entry(term.clone()).or_insert(*datatype);
                if known != *datatype {
                    return Err(CrosswalkError::RuleSyntax {
                        line: *line,
                        reason: format!("{term} already mapped as {known}"),
                    });
                }
            }
        }
        for (idx, (rule, line)) in rules.iter().enumerate() {
            if let RuleAction::MapTo { term, .. } = &rule.action {
                let compacted = normalize_field_name(&term.to_string());
                if by_pattern.get(&compacted).is_some_and(|&other| other != idx) {
                    return Err(CrosswalkError::TargetShadowsPattern {
                        target: term.to_string(),
                        line: *line,
                    });
                }
            }
        }
        Ok(RuleSet {
            rules: rules.into_iter().map(|(r, _)| r).collect(),
            target_class,
            by_pattern,
            target_datatypes,
        })
    }

    pub fn target_class(&self) -> EntityClass {
        self.target_class
    }

    pub fn rules(&self) -> &[CrosswalkRule] {
        &self.rules
    }

    pub fn rule_for(&self, raw_field_name: &str) -> Option<&CrosswalkRule> {
        self.by_pattern
            .get(&normalize_field_name(raw_field_name))
            .map(|&i| &self.rules[i])
    }

    /// Datatype a canonical term is written with, if some rule targets it.
    pub fn datatype_of(&self, term: &Term) -> Option<Datatype> {
        self.target_datatypes.get(term).copied()
    }
}

pub fn load_rules(bytes: &[u8], registry: &NamespaceRegistry) -> Result<RuleSet, CrosswalkError> {
    let syntax = |line: usize, reason: &str| CrosswalkError::RuleSyntax {
        line,
        reason: reason.to_string(),
    };
    let text = std::str::from_utf8(bytes).map_err(|_| syntax(1, "not UTF-8"))?;
    let rows = csv::parse(text).map_err(|e| syntax(e.row(), &e.to_string()))?;
    let mut rows = rows.into_iter();
    let header = rows.next().ok_or_else(|| syntax(1, "missing header"))?;
    if header.cells != RULE_HEADER {
        return Err(syntax(1, "header must be sourcePattern,action,target,datatype,note"));
    }
    let class_row = rows.next().ok_or(CrosswalkError::MissingClassDeclaration)?;
    if class_row.cells.first().map(|c| c.trim()) != Some(CLASS_DECLARATION) {
        return Err(CrosswalkError::MissingClassDeclaration);
    }
    if class_row.cells.len() != 5 {
        return Err(syntax(class_row.number, "expected 5 cells"));
    }
    let target_class: EntityClass = class_row.cells[2]
        .parse()
        .map_err(|e: ModelError| syntax(class_row.number, &e.to_string()))?;

    let mut rules = Vec::new();
    for mut row in rows {
        let line = row.number;
        // the trailing note column may be omitted
        if row.cells.len() == 4 {
            row.cells.push(String::new());
        }
        let [pattern, action, target, datatype, note]: [String; 5] = row
            .cells
            .try_into()
            .map_err(|_| syntax(line, "expected 5 cells"))?;
        if pattern.trim() == CLASS_DECLARATION {
            return Err(syntax(line, "@class may only appear on the first rule row"));
        }
        let action = match action.trim().to_ascii_lowercase().as_str() {
            "map" => {
                let term: Term = target
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, &format!("bad target term {target:?}")))?;
                let datatype: Datatype = datatype
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, &format!("bad datatype {datatype:?}")))?;
                RuleAction::MapTo { term, datatype }
            }
            "drop" => RuleAction::Drop {
                reason: note.clone(),
            },
            other => return Err(syntax(line, &format!("unknown action {other:?}"))),
        };
        rules.push((
            CrosswalkRule {
                source_pattern: pattern,
                action,
                note,
            },
            line,
        ));
    }
    RuleSet::build(target_class, rules, registry)
}

/// A data-quality finding from applying rules to one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkIssue {
    /// No rule covered the field; it was kept under `term`.
    UnmappedField { field: String, term: Term },
    /// The field was empty or whitespace and produced no statement.
    BlankValue { field: String },
    /// The value did not parse as the rule's datatype and was kept as a string.
    CoercionIssue {
        field: String,
        value: String,
        datatype: Datatype,
    },
}

impl WalkIssue {
    pub fn field(&self) -> &str {
        match self {
            WalkIssue::UnmappedField { field, .. }
            | WalkIssue::BlankValue { field }
            | WalkIssue::CoercionIssue { field, .. } => field,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WalkIssue::UnmappedField { .. } => "UnmappedField",
            WalkIssue::BlankValue { .. } => "BlankValue",
            WalkIssue::CoercionIssue { .. } => "CoercionIssue",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            WalkIssue::UnmappedField { term, .. } => format!("kept as {term}"),
            WalkIssue::BlankValue { .. } => String::new(),
            WalkIssue::CoercionIssue {
                value, datatype, ..
            } => format!("{value:?} is not a valid {datatype}; kept as string"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WalkOutput {
    pub pairs: Vec<(Term, LiteralValue)>,
    pub issues: Vec<WalkIssue>,
    /// Raw names of fields removed by drop rules.
    pub dropped: Vec<String>,
}

impl WalkOutput {
    /// The output pairs rendered back as a record whose field names are the
    /// compacted terms.
    pub fn as_record(&self, source_id: &str) -> SourceRecord {
        SourceRecord {
            source_id: source_id.to_string(),
            fields: self
                .pairs
                .iter()
                .map(|(t, v)| crate::ingest::RawField::new(t.to_string(), v.lexical()))
                .collect(),
        }
    }
}

/// lowerCamelCase of a raw field name: non-alphanumerics split words, the
/// first word is lowercased (entirely, if it is all caps), later words are
/// capitalized. A leading digit gets an `_` so the result is a local name.
pub fn lower_camel(raw: &str) -> String {
    let mut out = String::new();
    for word in raw.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()) {
        if out.is_empty() {
            if word.chars().all(|c| !c.is_ascii_lowercase()) {
                out.push_str(&word.to_ascii_lowercase());
            } else {
                let mut chars = word.chars();
                out.extend(chars.next().map(|c| c.to_ascii_lowercase()));
                out.push_str(chars.as_str());
            }
        } else {
            let mut chars = word.chars();
            out.extend(chars.next().map(|c| c.to_ascii_uppercase()));
            out.push_str(chars.as_str());
        }
    }
    if out.is_empty() {
        return "field".to_string();
    }
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

/// Map every field of `record`. Never fails: problems are reported as
/// [`WalkIssue`]s. Output order follows field order.
pub fn apply_rules(ruleset: &RuleSet, registry: &NamespaceRegistry, record: &SourceRecord) -> WalkOutput {
    let mut out = WalkOutput::default();
    for field in &record.fields {
        let (term, datatype, unmapped) = match ruleset.rule_for(&field.name).map(|r| &r.action) {
            Some(RuleAction::Drop { .. }) => {
                out.dropped.push(field.name.clone());
                continue;
            }
            Some(RuleAction::MapTo { term, datatype }) => (term.clone(), *datatype, false),
            None => match registry.term(field.name.trim()) {
                // already canonical
                Ok(term) => {
                    let dt = ruleset.datatype_of(&term).unwrap_or(Datatype::String);
                    (term, dt, false)
                }
                Err(_) => {
                    let term = Term::new(registry.project().prefix(), lower_camel(&field.name))
                        .expect("lower_camel yields a local name");
                    (term, Datatype::String, true)
                }
            },
        };
        if field.is_blank() {
            out.issues.push(WalkIssue::BlankValue {
                field: field.name.clone(),
            });
            continue;
        }
        let value = match coerce_value(&field.value, datatype) {
            Ok(v) => v,
            Err(_) => {
                out.issues.push(WalkIssue::CoercionIssue {
                    field: field.name.clone(),
                    value: field.value.clone(),
                    datatype,
                });
                LiteralValue::string(field.value.trim())
            }
        };
        if unmapped {
            out.issues.push(WalkIssue::UnmappedField {
                field: field.name.clone(),
                term: term.clone(),
            });
        }
        out.pairs.push((term, value));
    }
    out
}

/// The rule files shipped with the crate, one per metadata source, as
/// `(file name, contents)`.
pub fn default_rule_files() -> [(&'static str, &'static str); 5] {
    [
        ("media.csv", include_str!("../rules/media.csv")),
        ("event.csv", include_str!("../rules/event.csv")),
        ("iq.csv", include_str!("../rules/iq.csv")),
        ("extended.csv", include_str!("../rules/extended.csv")),
        ("batch.csv", include_str!("../rules/batch.csv")),
    ]
}
