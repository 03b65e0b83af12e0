//! OCR label validation against collection-event metadata, and metadata
//! completeness scoring.

use serde::ser::SerializeStruct;
use serde::Serialize;
use thiserror::Error;

use crate::ark::ArkId;
use crate::crosswalk::WalkIssue;
use crate::graph::EntityNode;
use crate::model::{EntityClass, Term};

pub const DEFAULT_SIM_THRESHOLD: f64 = 0.8;
pub const DEFAULT_PASS_THRESHOLD: f64 = 0.75;

/// Slack for threshold comparisons so that a similarity which is exactly
/// the threshold in rational terms is not lost to float rounding.
const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("label text is empty")]
    EmptyLabel,
    #[error("expected a CollectionEvent entity, got {0}")]
    WrongClass(EntityClass),
    #[error("no fields to check")]
    NoFields,
    #[error("threshold {0} outside (0, 1]")]
    BadThreshold(f64),
}

/// Raw OCR output and its tokens: lowercase alphanumeric runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelText {
    text: String,
    tokens: Vec<String>,
}

impl LabelText {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        LabelText { text, tokens }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// `1 - lev(a, b) / max(len)`, counted in characters; two empty strings are
/// identical.
pub fn similarity(a: &str, b: &str) -> f64 {
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / max as f64
}

/// Best similarity between `expected` and any contiguous window of `label`
/// holding as many tokens as `expected`. A label shorter than the window is
/// compared whole.
pub fn best_window_similarity(label: &[String], expected: &[String]) -> f64 {
    if expected.is_empty() {
        return 0.0;
    }
    let target = expected.join(" ");
    if label.len() <= expected.len() {
        return similarity(&label.join(" "), &target);
    }
    label
        .windows(expected.len())
        .map(|w| similarity(&w.join(" "), &target))
        .fold(0.0, f64::max)
}

pub fn meets(value: f64, threshold: f64) -> bool {
    value + EPSILON >= threshold
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldCheck {
    pub term: Term,
    /// `None` when the entity carries no value for the term.
    pub expected: Option<String>,
    pub matched: bool,
    pub best_similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub checked_fields: Vec<FieldCheck>,
    pub score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub similarity: f64,
    pub pass: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            similarity: DEFAULT_SIM_THRESHOLD,
            pass: DEFAULT_PASS_THRESHOLD,
        }
    }
}

impl Thresholds {
    pub fn new(similarity: f64, pass: f64) -> Result<Self, ValidateError> {
        for t in [similarity, pass] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(ValidateError::BadThreshold(t));
            }
        }
        Ok(Thresholds { similarity, pass })
    }
}

/// The fields a specimen label is expected to carry.
pub fn default_label_fields() -> Vec<Term> {
    ["dwc:genus", "dwc:specificEpithet", "dwc:catalogNumber"]
        .iter()
        .map(|t| t.parse().expect("static term"))
        .collect()
}

/// Required terms for completeness scoring of a CollectionEvent.
pub fn default_required(class: EntityClass) -> Vec<Term> {
    let terms: &[&str] = match class {
        EntityClass::CollectionEvent => &[
            "dwc:catalogNumber",
            "dwc:genus",
            "dwc:specificEpithet",
            "dwc:eventDate",
            "dwc:locality",
        ],
        EntityClass::Multimedia => &["dcterms:identifier", "dcterms:format", "exif:PixelXDimension", "exif:PixelYDimension"],
        EntityClass::IQMetadata => &["bgnn:blurScore", "bgnn:hasRuler"],
        EntityClass::ExtendedImageMetadata => &["bgnn:maskFile", "bgnn:segmentCount"],
        EntityClass::Batch => &["dcterms:title", "dcterms:created"],
    };
    terms.iter().map(|t| t.parse().expect("static term")).collect()
}

pub fn validate_label(
    label: &LabelText,
    event: &EntityNode,
    fields: &[Term],
    thresholds: Thresholds,
) -> Result<ValidationReport, ValidateError> {
    Thresholds::new(thresholds.similarity, thresholds.pass)?;
    if event.class != EntityClass::CollectionEvent {
        return Err(ValidateError::WrongClass(event.class));
    }
    if fields.is_empty() {
        return Err(ValidateError::NoFields);
    }
    if label.tokens().is_empty() {
        return Err(ValidateError::EmptyLabel);
    }
    let checked_fields: Vec<FieldCheck> = fields
        .iter()
        .map(|term| {
            let expected = event.first_text(term);
            let best = expected
                .as_deref()
                .map(|e| best_window_similarity(label.tokens(), &tokenize(e)))
                .unwrap_or(0.0);
            FieldCheck {
                term: term.clone(),
                matched: expected.is_some() && meets(best, thresholds.similarity),
                expected,
                best_similarity: best,
            }
        })
        .collect();
    let matched = checked_fields.iter().filter(|f| f.matched).count();
    let score = matched as f64 / checked_fields.len() as f64;
    Ok(ValidationReport {
        pass: meets(score, thresholds.pass),
        checked_fields,
        score,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub entity: ArkId,
    pub required: Vec<Term>,
    pub present: Vec<Term>,
    pub completeness: f64,
    pub issues: Vec<WalkIssue>,
}

impl Serialize for QualityReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Issue<'a> {
            kind: &'a str,
            field: &'a str,
            detail: String,
        }
        let issues: Vec<Issue> = self
            .issues
            .iter()
            .map(|i| Issue {
                kind: i.kind(),
                field: i.field(),
                detail: i.detail(),
            })
            .collect();
        let mut s = serializer.serialize_struct("QualityReport", 5)?;
        s.serialize_field("entity", &self.entity)?;
        s.serialize_field("required", &self.required)?;
        s.serialize_field("present", &self.present)?;
        s.serialize_field("completeness", &self.completeness)?;
        s.serialize_field("issues", &issues)?;
        s.end()
    }
}

/// Fraction of `required` terms with at least one non-blank value. An empty
/// requirement list is trivially complete.
pub fn completeness(entity: &EntityNode, required: &[Term], issues: Vec<WalkIssue>) -> QualityReport {
    let present: Vec<Term> = required
        .iter()
        .filter(|t| entity.values(t).next().is_some())
        .cloned()
        .collect();
    let completeness = if required.is_empty() {
        1.0
    } else {
        present.len() as f64 / required.len() as f64
    };
    QualityReport {
        entity: entity.ark.clone(),
        required: required.to_vec(),
        present,
        completeness,
        issues,
    }
}

/// One line of the per-entity report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityReport {
    pub ark: ArkId,
    /// Absent when no label text was available for the entity.
    pub validation: Option<ValidationReport>,
    pub quality: QualityReport,
}

impl EntityReport {
    pub fn passed(&self) -> Option<bool> {
        self.validation.as_ref().map(|v| v.pass)
    }
}

/// CSV with columns `ark,score,pass,completeness,issueCount`. Score and pass
/// are blank for entities that were not label-checked.
pub fn render_report_csv(reports: &[EntityReport]) -> String {
    let mut out = String::from("ark,score,pass,completeness,issueCount\r\n");
    for r in reports {
        let (score, pass) = match &r.validation {
            Some(v) => (format!("{:.4}", v.score), v.pass.to_string()),
            None => (String::new(), String::new()),
        };
        let row = [
            r.ark.to_string(),
            score,
            pass,
            format!("{:.4}", r.quality.completeness),
            r.quality.issues.len().to_string(),
        ];
        crate::csv::write_row(&mut out, &row);
    }
    out
}
