use std::fmt;
use std::str::FromStr;

use super::namespace::NamespaceRegistry;
use super::term::Term;
use super::ModelError;

/// The five node kinds of the restructured metadata graph. Closed: there is
/// no way to construct a sixth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityClass {
    /// Administrative metadata for a raw image; parent of the derived nodes.
    Multimedia,
    /// Specimen data gathered in the field.
    CollectionEvent,
    /// Image-quality metadata derived from bounding-box images.
    IQMetadata,
    /// Metadata for labeled segmentation masks.
    ExtendedImageMetadata,
    /// Administrative metadata for the released dataset.
    Batch,
}

impl EntityClass {
    pub const ALL: [EntityClass; 5] = [
        EntityClass::Multimedia,
        EntityClass::CollectionEvent,
        EntityClass::IQMetadata,
        EntityClass::ExtendedImageMetadata,
        EntityClass::Batch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityClass::Multimedia => "Multimedia",
            EntityClass::CollectionEvent => "CollectionEvent",
            EntityClass::IQMetadata => "IQMetadata",
            EntityClass::ExtendedImageMetadata => "ExtendedImageMetadata",
            EntityClass::Batch => "Batch",
        }
    }

    /// Classes whose nodes hang off a Multimedia parent.
    pub fn is_image_child(self) -> bool {
        matches!(
            self,
            EntityClass::CollectionEvent
                | EntityClass::IQMetadata
                | EntityClass::ExtendedImageMetadata
        )
    }

    pub fn term(self, registry: &NamespaceRegistry) -> Term {
        Term::new(registry.project().prefix(), self.name()).expect("class names are local names")
    }

    pub fn iri(self, registry: &NamespaceRegistry) -> String {
        format!("{}{}", registry.project().iri(), self.name())
    }

    pub fn from_iri(registry: &NamespaceRegistry, iri: &str) -> Option<EntityClass> {
        iri.strip_prefix(registry.project().iri())
            .and_then(|name| name.parse().ok())
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityClass {
    type Err = ModelError;

    /// Accepts the canonical names and the spaced labels "Collection event"
    /// and "IQ metadata".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squashed: String = s.split_whitespace().collect::<Vec<_>>().join(" ");
        match squashed.as_str() {
            "Multimedia" => Ok(EntityClass::Multimedia),
            "CollectionEvent" | "Collection event" => Ok(EntityClass::CollectionEvent),
            "IQMetadata" | "IQ metadata" => Ok(EntityClass::IQMetadata),
            "ExtendedImageMetadata" => Ok(EntityClass::ExtendedImageMetadata),
            "Batch" => Ok(EntityClass::Batch),
            _ => Err(ModelError::UnknownClass(s.to_string())),
        }
    }
}
