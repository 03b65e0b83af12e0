//! Specimen-image metadata pipeline.
//!
//! Raw CSV deliveries are [ingested](ingest), mapped onto standard terms by
//! [crosswalk] rules, assembled into an entity-attribute-value [graph] keyed
//! by [ARK](ark) identifiers, [validated](validate) against OCR label text,
//! and [exported](export) as reproducible zip bundles. [`pipeline`] runs
//! the stages end to end and [`fixtures`] generates synthetic corpora.

pub mod ark;
pub mod csv;
pub mod ingest;
pub mod model;
pub mod crosswalk;
pub mod graph;
pub mod validate;
pub mod export;
pub mod fixtures;
pub mod pipeline;
