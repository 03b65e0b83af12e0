//! Archival Resource Keys: deterministic minting, parsing, NCDA check
//! characters and qualifier-path children.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::EntityClass;

/// Digits plus the consonants that cannot form words.
pub const BETANUMERIC: &[u8; 29] = b"0123456789bcdfghjkmnpqrstvwxz";
/// Test shoulder prefixed to every minted name.
pub const SHOULDER: &str = "fk4";
/// NAAN reserved for examples and testing.
pub const DEFAULT_NAAN: &str = "99999";
/// Resolver prefix used when an ARK is embedded in an IRI.
pub const RESOLVER: &str = "https://n2t.net/";

const BLADE_LEN: usize = 10;
// 29^10
const BLADE_SPACE: u64 = 420_707_233_300_201;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArkError {
    #[error("not an ARK: {0:?}")]
    NotAnArk(String),
    #[error("check character mismatch in {text:?}: expected {expected:?}")]
    BadCheckChar { text: String, expected: char },
    #[error("bad qualifier component {0:?}")]
    BadQualifier(String),
    #[error("NAAN must be exactly five digits, got {0:?}")]
    BadNaan(String),
    #[error("source key is empty")]
    EmptyKey,
}

/// A parsed or minted ARK, `ark:/NAAN/fk4BBBBBBBBBBC[/qualifier...]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArkId {
    naan: [u8; 5],
    shoulder: [u8; 3],
    blade: [u8; BLADE_LEN],
    check: u8,
    qualifier: Vec<String>,
}

pub fn is_betanumeric(c: char) -> bool {
    c.is_ascii() && BETANUMERIC.contains(&(c as u8))
}

fn ordinal(c: u8) -> u32 {
    BETANUMERIC.iter().position(|&b| b == c).unwrap_or(0) as u32
}

/// NCDA check character over `naan + "/" + shoulder_blade`: the sum of each
/// character's alphabet ordinal times its 1-based position, mod 29.
/// Characters outside the alphabet weigh zero.
pub fn check_char(naan: &str, shoulder_blade: &str) -> char {
    let sum: u32 = naan
        .bytes()
        .chain(std::iter::once(b'/'))
        .chain(shoulder_blade.bytes())
        .enumerate()
        .map(|(i, c)| ordinal(c) * (i as u32 + 1))
        .sum();
    BETANUMERIC[(sum % 29) as usize] as char
}

/// Five ASCII digits.
pub fn validate_naan(naan: &str) -> Result<[u8; 5], ArkError> {
    let bytes: [u8; 5] = naan
        .as_bytes()
        .try_into()
        .map_err(|_| ArkError::BadNaan(naan.to_string()))?;
    if !bytes.iter().all(u8::is_ascii_digit) {
        return Err(ArkError::BadNaan(naan.to_string()));
    }
    Ok(bytes)
}

fn validate_component(component: &str) -> Result<(), ArkError> {
    if component.is_empty() || !component.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(ArkError::BadQualifier(component.to_string()));
    }
    Ok(())
}

/// Base-29 encoding of `n mod 29^10`, left-padded with '0' to ten characters.
fn encode_blade(n: u64) -> [u8; BLADE_LEN] {
    let mut n = n % BLADE_SPACE;
    let mut blade = [b'0'; BLADE_LEN];
    for slot in blade.iter_mut().rev() {
        *slot = BETANUMERIC[(n % 29) as usize];
        n /= 29;
    }
    blade
}

/// Mint the identifier for `(class, source_key)` under `naan`. The same
/// inputs always produce the same ARK.
pub fn mint(naan: &str, class: EntityClass, source_key: &str) -> Result<ArkId, ArkError> {
    let naan_bytes = validate_naan(naan)?;
    if source_key.is_empty() {
        return Err(ArkError::EmptyKey);
    }
    let digest = Sha256::new()
        .chain_update(naan.as_bytes())
        .chain_update(b"|")
        .chain_update(class.name().as_bytes())
        .chain_update(b"|")
        .chain_update(source_key.as_bytes())
        .finalize();
    let head = u64::from_be_bytes(digest[..8].try_into().expect("sha-256 has 32 bytes"));
    let blade = encode_blade(head);
    let mut ark = ArkId {
        naan: naan_bytes,
        shoulder: *b"fk4",
        blade,
        check: b'0',
        qualifier: Vec::new(),
    };
    ark.check = check_char(ark.naan(), &ark.shoulder_blade()) as u8;
    Ok(ark)
}

impl ArkId {
    pub fn naan(&self) -> &str {
        std::str::from_utf8(&self.naan).expect("ascii")
    }

    pub fn shoulder(&self) -> &str {
        std::str::from_utf8(&self.shoulder).expect("ascii")
    }

    pub fn blade(&self) -> &str {
        std::str::from_utf8(&self.blade).expect("ascii")
    }

    pub fn check(&self) -> char {
        self.check as char
    }

    pub fn qualifier(&self) -> &[String] {
        &self.qualifier
    }

    pub fn shoulder_blade(&self) -> String {
        format!("{}{}", self.shoulder(), self.blade())
    }

    /// Append one qualifier component. The base name and check character
    /// are untouched, so [`base`](Self::base) recovers the parent.
    pub fn child(&self, component: &str) -> Result<ArkId, ArkError> {
        validate_component(component)?;
        let mut child = self.clone();
        child.qualifier.push(component.to_string());
        Ok(child)
    }

    /// The identifier with its qualifier path stripped.
    pub fn base(&self) -> ArkId {
        ArkId {
            qualifier: Vec::new(),
            ..self.clone()
        }
    }

    pub fn is_child(&self) -> bool {
        !self.qualifier.is_empty()
    }

    /// Unique file stem for this identifier: the blade, plus any qualifier
    /// components joined with `_`.
    pub fn file_stem(&self) -> String {
        let mut stem = self.blade().to_string();
        for q in &self.qualifier {
            stem.push('_');
            stem.push_str(q);
        }
        stem
    }

    pub fn to_iri(&self) -> String {
        format!("{RESOLVER}{self}")
    }

    pub fn from_iri(iri: &str) -> Option<Result<ArkId, ArkError>> {
        iri.strip_prefix(RESOLVER).map(str::parse)
    }
}

impl fmt::Display for ArkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ark:/{}/{}{}{}",
            self.naan(),
            self.shoulder(),
            self.blade(),
            self.check()
        )?;
        for q in &self.qualifier {
            write!(f, "/{q}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for ArkId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for ArkId {
    type Err = ArkError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let not_an_ark = || ArkError::NotAnArk(text.to_string());
        let rest = text.strip_prefix("ark:/").ok_or_else(not_an_ark)?;
        let mut parts = rest.split('/');
        let naan = parts.next().ok_or_else(not_an_ark)?;
        let naan = validate_naan(naan).map_err(|_| not_an_ark())?;
        let name = parts.next().ok_or_else(not_an_ark)?;
        let name = name.as_bytes();
        if name.len() != 3 + BLADE_LEN + 1 || !name.iter().all(|&b| is_betanumeric(b as char)) {
            return Err(not_an_ark());
        }
        let naan_str = std::str::from_utf8(&naan).expect("ascii");
        let shoulder_blade = std::str::from_utf8(&name[..name.len() - 1]).expect("ascii");
        let expected = check_char(naan_str, shoulder_blade);
        if name[name.len() - 1] as char != expected {
            return Err(ArkError::BadCheckChar {
                text: text.to_string(),
                expected,
            });
        }
        if &name[..3] != SHOULDER.as_bytes() {
            return Err(not_an_ark());
        }
        let mut qualifier = Vec::new();
        for component in parts {
            validate_component(component)?;
            qualifier.push(component.to_string());
        }
        Ok(ArkId {
            naan,
            shoulder: name[..3].try_into().expect("length checked"),
            blade: name[3..3 + BLADE_LEN].try_into().expect("length checked"),
            check: name[name.len() - 1],
            qualifier,
        })
    }
}
