use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::namespace::XSD;
use super::{is_absolute_iri, ModelError};

/// The six literal datatypes the pipeline understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    DateTime,
    AnyUri,
}

impl Datatype {
    pub const ALL: [Datatype; 6] = [
        Datatype::String,
        Datatype::Integer,
        Datatype::Decimal,
        Datatype::Boolean,
        Datatype::DateTime,
        Datatype::AnyUri,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
            Datatype::DateTime => "dateTime",
            Datatype::AnyUri => "anyURI",
        }
    }

    pub fn iri(self) -> String {
        format!("{XSD}{}", self.name())
    }

    pub fn from_iri(iri: &str) -> Option<Datatype> {
        iri.strip_prefix(XSD).and_then(|n| n.parse().ok())
    }

    /// Whether `lexical` is a valid lexical form, taken verbatim.
    pub fn accepts(self, lexical: &str) -> bool {
        match self {
            Datatype::String => true,
            Datatype::Integer => is_integer(lexical),
            Datatype::Decimal => is_decimal(lexical),
            Datatype::Boolean => lexical == "true" || lexical == "false",
            Datatype::DateTime => is_date_time(lexical),
            Datatype::AnyUri => is_absolute_iri(lexical),
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Datatype {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Datatype::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| ModelError::UnknownDatatype(s.to_string()))
    }
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    match frac {
        None => !int.is_empty() && all_digits(int),
        Some(f) => (!int.is_empty() || !f.is_empty()) && all_digits(int) && all_digits(f),
    }
}

/// ISO-8601 date-time, with or without a UTC offset.
fn is_date_time(s: &str) -> bool {
    chrono::DateTime::parse_from_rfc3339(s).is_ok()
        || chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
}

/// A typed literal whose lexical form is valid for its datatype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiteralValue {
    lexical: String,
    datatype: Datatype,
}

impl LiteralValue {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, ModelError> {
        let lexical = lexical.into();
        if !datatype.accepts(&lexical) {
            return Err(ModelError::InvalidLexical { lexical, datatype });
        }
        Ok(LiteralValue { lexical, datatype })
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        LiteralValue {
            lexical: lexical.into(),
            datatype: Datatype::String,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn is_blank(&self) -> bool {
        self.lexical.trim().is_empty()
    }
}
