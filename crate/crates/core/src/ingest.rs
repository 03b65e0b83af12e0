//! Tabular metadata deliveries: CSV in, [`SourceRecord`]s out.

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::csv::{self, CsvError};
use crate::model::{Datatype, LiteralValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("missing header: {0}")]
    MissingHeader(String),
    #[error("duplicate source id {id:?} in row {row}")]
    DuplicateSourceId { id: String, row: usize },
    #[error("malformed CSV in row {row}: {reason}")]
    MalformedCsv { row: usize, reason: String },
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("source name is empty")]
    EmptySourceName,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read {raw:?} as {datatype}")]
pub struct CoercionError {
    pub raw: String,
    pub datatype: Datatype,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawField {
    pub name: String,
    pub value: String,
}

impl RawField {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        RawField {
            name: name.into(),
            value: value.into(),
        }
    }

    pub fn is_blank(&self) -> bool {
        self.value.trim().is_empty()
    }
}

/// One row of a delivery, keyed by its source identifier. Field names and
/// values are kept exactly as delivered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRecord {
    pub source_id: String,
    pub fields: Vec<RawField>,
}

impl SourceRecord {
    pub fn blank_fields(&self) -> impl Iterator<Item = &RawField> {
        self.fields.iter().filter(|f| f.is_blank())
    }
}

/// A row dropped during ingest, reported rather than fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    pub row_number: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub source_name: String,
    pub received_at: DateTime<Utc>,
    pub columns: Vec<String>,
    pub records: Vec<SourceRecord>,
    pub rejected: Vec<RejectedRow>,
}

impl Delivery {
    pub fn field_count(&self) -> usize {
        self.records.iter().map(|r| r.fields.len()).sum()
    }

    /// Rejected-row report, columns `rowNumber,reason`.
    pub fn rejected_csv(&self) -> String {
        let mut out = String::new();
        csv::write_row(&mut out, &["rowNumber", "reason"]);
        for r in &self.rejected {
            csv::write_row(&mut out, &[r.row_number.to_string(), r.reason.clone()]);
        }
        out
    }
}

fn normalize_header(s: &str) -> String {
    s.trim().to_lowercase()
}

pub fn parse_record_table(
    bytes: &[u8],
    id_column: &str,
    source_name: &str,
) -> Result<Delivery, IngestError> {
    if source_name.trim().is_empty() {
        return Err(IngestError::EmptySourceName);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let rows = csv::parse(text).map_err(|e| IngestError::MalformedCsv {
        row: e.row(),
        reason: match e {
            CsvError::UnbalancedQuote { .. } => "unbalanced quote".into(),
            CsvError::StrayQuote { .. } => "character after closing quote".into(),
        },
    })?;
    let mut rows = rows.into_iter();
    let header = rows
        .next()
        .ok_or_else(|| IngestError::MissingHeader("no header row".into()))?;
    let wanted = normalize_header(id_column);
    let id_idx = header
        .cells
        .iter()
        .position(|h| normalize_header(h) == wanted)
        .ok_or_else(|| IngestError::MissingHeader(format!("no column named {id_column:?}")))?;
    let width = header.cells.len();

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for row in rows {
        if row.cells.len() != width {
            rejected.push(RejectedRow {
                row_number: row.number,
                reason: format!("expected {width} cells, found {}", row.cells.len()),
            });
            continue;
        }
        let id = row.cells[id_idx].trim();
        if id.is_empty() {
            rejected.push(RejectedRow {
                row_number: row.number,
                reason: format!("blank {}", header.cells[id_idx].trim()),
            });
            continue;
        }
        if seen.insert(id.to_string(), row.number).is_some() {
            return Err(IngestError::DuplicateSourceId {
                id: id.to_string(),
                row: row.number,
            });
        }
        let source_id = id.to_string();
        let fields = header
            .cells
            .iter()
            .zip(row.cells)
            .map(|(name, value)| RawField::new(name.clone(), value))
            .collect();
        records.push(SourceRecord { source_id, fields });
    }
    Ok(Delivery {
        source_name: source_name.to_string(),
        received_at: Utc::now(),
        columns: header.cells,
        records,
        rejected,
    })
}

/// Trim and validate `raw` as `target`. Decimals use '.' only.
pub fn coerce_value(raw: &str, target: Datatype) -> Result<LiteralValue, CoercionError> {
    let trimmed = raw.trim();
    LiteralValue::new(trimmed, target).map_err(|_| CoercionError {
        raw: raw.to_string(),
        datatype: target,
    })
}
