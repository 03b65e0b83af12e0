//! Synthetic corpora: one CSV per metadata source plus OCR label texts.
//!
//! Column headers deliberately mix rule-mapped legacy names, already
//! canonical terms and unknown junk columns so every crosswalk path gets
//! exercised.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ark::{mint, DEFAULT_NAAN};
use crate::csv::write_row;
use crate::graph::Graph;
use crate::model::{Datatype, EntityClass, LiteralValue, NamespaceRegistry, Node, Statement, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub record_count: usize,
    pub seed: u64,
    /// (genus, specific epithet) pairs.
    pub genus_pool: Vec<(String, String)>,
    /// Chance that a non-key cell is left blank.
    pub missing_field_rate: f64,
    /// Per-character chance of an OCR edit in label text.
    pub ocr_noise_rate: f64,
}

pub const DEFAULT_GENUS_POOL: [(&str, &str); 10] = [
    ("Carassius", "auratus"),
    ("Notropis", "atherinoides"),
    ("Lepomis", "macrochirus"),
    ("Esox", "lucius"),
    ("Ictalurus", "punctatus"),
    ("Micropterus", "salmoides"),
    ("Cyprinus", "carpio"),
    ("Perca", "flavescens"),
    ("Pimephales", "promelas"),
    ("Ameiurus", "melas"),
];

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            record_count: 100,
            seed: 42,
            genus_pool: DEFAULT_GENUS_POOL
                .iter()
                .map(|(g, s)| (g.to_string(), s.to_string()))
                .collect(),
            missing_field_rate: 0.0,
            ocr_noise_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FixtureError {
    #[error("rate {0} outside [0, 1)")]
    BadRate(f64),
    #[error("genus pool is empty")]
    EmptyGenusPool,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), FixtureError> {
        for r in [self.missing_field_rate, self.ocr_noise_rate] {
            if !(0.0..1.0).contains(&r) {
                return Err(FixtureError::BadRate(r));
            }
        }
        if self.genus_pool.is_empty() {
            return Err(FixtureError::EmptyGenusPool);
        }
        Ok(())
    }
}

pub const KEY_COLUMN: &str = "SourceKey";
pub const LABEL_COLUMN: &str = "labelText";

pub const MEDIA_COLUMNS: [&str; 9] = [
    KEY_COLUMN,
    "AccessConstraints",
    "ImageWidth",
    "ImageHeight",
    "Format",
    "xmp:CreateDate",
    "Photographer",
    "LegacyNotes",
    "Scanner Model",
];
pub const EVENT_COLUMNS: [&str; 13] = [
    KEY_COLUMN,
    "catalogNumber",
    "Institution",
    "Genus",
    "Species",
    "Scientific Name",
    "Event Date",
    "Locality",
    "dwc:country",
    "Latitude",
    "Collector",
    "OldRecNo",
    "Tank ID",
];
pub const IQ_COLUMNS: [&str; 7] = [
    KEY_COLUMN,
    "BBox Width",
    "BBox Height",
    "Blur Score",
    "Has Ruler",
    "Specimen Angle",
    "qc_flag",
];
pub const EXTENDED_COLUMNS: [&str; 7] = [
    KEY_COLUMN,
    "InstanceID",
    "MaskFile",
    "SegmentCount",
    "Mask Width",
    "Mask Height",
    "Software",
];
pub const BATCH_COLUMNS: [&str; 7] = [
    KEY_COLUMN,
    "Title",
    "Publisher",
    "Created",
    "Job Ref",
    "Rights Holder",
    "DeprecatedField",
];

/// Generated files, each a complete CSV document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub media: String,
    pub event: String,
    pub iq: String,
    pub extended: String,
    pub batch: String,
    /// `SourceKey,labelText`, keyed like the media records.
    pub labels: String,
}

impl Corpus {
    /// `(file name, contents)`; file stems match the shipped rule files.
    pub fn files(&self) -> [(&'static str, &str); 6] {
        [
            ("media.csv", &self.media),
            ("event.csv", &self.event),
            ("iq.csv", &self.iq),
            ("extended.csv", &self.extended),
            ("batch.csv", &self.batch),
            ("labels.csv", &self.labels),
        ]
    }

    /// The five source tables, without labels.
    pub fn sources(&self) -> [(&'static str, &str); 5] {
        let [m, e, i, x, b, _] = self.files();
        [m, e, i, x, b]
    }
}

const INSTITUTIONS: [&str; 4] = ["INHS", "FMNH", "UMMZ", "OSUM"];
const LOCALITIES: [&str; 8] = [
    "Lake Michigan",
    "Illinois River",
    "Sangamon River",
    "Rock Creek",
    "Kaskaskia River",
    "Lake Erie",
    "Salt Fork, Vermilion River",
    "Mackinaw River",
];
const COLLECTORS: [&str; 5] = ["P. W. Smith", "L. M. Page", "R. Bailey", "C. Hubbs", "M. Retzer"];
const FORMATS: [&str; 3] = ["image/jpeg", "image/tiff", "image/png"];
const ACCESS: [&str; 2] = ["CC BY-NC 4.0", "Public domain"];
const OCR_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

struct Table {
    out: String,
    width: usize,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        let mut out = String::new();
        write_row(&mut out, columns);
        Table {
            out,
            width: columns.len(),
        }
    }

    /// The first cell is the key and is never blanked.
    fn push(&mut self, mut cells: Vec<String>, rng: &mut ChaCha8Rng, missing_rate: f64) {
        assert_eq!(cells.len(), self.width);
        for cell in cells.iter_mut().skip(1) {
            if missing_rate > 0.0 && rng.gen_bool(missing_rate) {
                cell.clear();
            }
        }
        write_row(&mut self.out, &cells);
    }
}

fn date(rng: &mut ChaCha8Rng, from_year: i32, to_year: i32) -> String {
    format!(
        "{:04}-{:02}-{:02}T{:02}:{:02}:00",
        rng.gen_range(from_year..=to_year),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
        rng.gen_range(6..=18),
        rng.gen_range(0..60)
    )
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

/// Single-character substitutions, deletions and insertions, each character
/// edited with probability `rate`.
pub fn ocr_noise(text: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    if rate <= 0.0 {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len() + 4);
    for c in text.chars() {
        if !rng.gen_bool(rate) {
            out.push(c);
            continue;
        }
        let other = OCR_ALPHABET[rng.gen_range(0..OCR_ALPHABET.len())] as char;
        match rng.gen_range(0..3) {
            0 => out.push(other),
            1 => {}
            _ => {
                out.push(c);
                out.push(other);
            }
        }
    }
    out
}

/// The record key for index `i`.
pub fn record_key(i: usize) -> String {
    format!("FISH_{i:06}")
}

pub const BATCH_KEY: &str = "BATCH_0001";

/// Deterministic in `spec`. With zero records every file is header-only.
pub fn generate(spec: &CorpusSpec) -> Result<Corpus, FixtureError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let miss = spec.missing_field_rate;
    let mut media = Table::new(&MEDIA_COLUMNS);
    let mut event = Table::new(&EVENT_COLUMNS);
    let mut iq = Table::new(&IQ_COLUMNS);
    let mut extended = Table::new(&EXTENDED_COLUMNS);
    let mut batch = Table::new(&BATCH_COLUMNS);
    let mut labels = String::new();
    write_row(&mut labels, &[KEY_COLUMN, LABEL_COLUMN]);

    for i in 0..spec.record_count {
        let key = record_key(i);
        let width: u32 = rng.gen_range(2000..6000);
        let height: u32 = rng.gen_range(800..3000);
        let photographer = pick(&mut rng, &COLLECTORS);
        media.push(
            vec![
                key.clone(),
                pick(&mut rng, &ACCESS).into(),
                width.to_string(),
                height.to_string(),
                pick(&mut rng, &FORMATS).into(),
                date(&mut rng, 2015, 2021),
                photographer.into(),
                "scanned from slide".into(),
                format!("Scanner {}", rng.gen_range(1..4)),
            ],
            &mut rng,
            miss,
        );

        let (genus, species) = &spec.genus_pool[rng.gen_range(0..spec.genus_pool.len())];
        let institution = pick(&mut rng, &INSTITUTIONS);
        let catalog = rng.gen_range(1000..99999).to_string();
        let locality = pick(&mut rng, &LOCALITIES);
        let event_date = date(&mut rng, 1890, 2010);
        // a few comma-decimal latitudes produce coercion issues
        let latitude = if rng.gen_bool(0.01) {
            format!("{},{:04}", rng.gen_range(36..43), rng.gen_range(0..10000))
        } else {
            format!("{}.{:04}", rng.gen_range(36..43), rng.gen_range(0..10000))
        };
        event.push(
            vec![
                key.clone(),
                catalog.clone(),
                institution.into(),
                genus.clone(),
                species.clone(),
                format!("{genus} {species}"),
                event_date.clone(),
                locality.into(),
                "United States".into(),
                latitude,
                pick(&mut rng, &COLLECTORS).into(),
                format!("R{}", rng.gen_range(1..500)),
                format!("T-{}", rng.gen_range(1..40)),
            ],
            &mut rng,
            miss,
        );

        iq.push(
            vec![
                key.clone(),
                rng.gen_range(200..width).to_string(),
                rng.gen_range(100..height).to_string(),
                format!("{:.3}", rng.gen_range(0.0..1.0f64)),
                rng.gen_bool(0.9).to_string(),
                format!("{:.1}", rng.gen_range(-15.0..15.0f64)),
                pick(&mut rng, &["ok", "recheck", "?"]).into(),
            ],
            &mut rng,
            miss,
        );

        extended.push(
            vec![
                key.clone(),
                format!("xmp.iid:{:016x}", rng.gen::<u64>()),
                format!("{key}_mask.png"),
                rng.gen_range(1..12).to_string(),
                width.to_string(),
                height.to_string(),
                "segmenter 1.2".into(),
            ],
            &mut rng,
            miss,
        );

        let label = format!(
            "{institution} {catalog} {genus} {species} {locality} {}",
            &event_date[..10]
        );
        let label = ocr_noise(&label, spec.ocr_noise_rate, &mut rng);
        write_row(&mut labels, &[key, label]);
    }
    if spec.record_count > 0 {
        batch.push(
            vec![
                BATCH_KEY.into(),
                "Fish specimen image collection".into(),
                "Example Museum Consortium".into(),
                "2021-06-01T00:00:00".into(),
                format!("JOB-{}", spec.seed),
                "Example Museum Consortium".into(),
                "old title".into(),
            ],
            &mut rng,
            miss,
        );
    }
    Ok(Corpus {
        media: media.out,
        event: event.out,
        iq: iq.out,
        extended: extended.out,
        batch: batch.out,
        labels,
    })
}

/// A three-specimen corpus with one Carassius auratus, for examples and
/// end-to-end tests. The Notropis record's label names Carassius, so it
/// fails validation.
pub fn carassius_corpus() -> Corpus {
    let rows: [(&str, &str, &str, &str, &str); 3] = [
        ("INHS_FISH_12345", "12345", "Carassius", "auratus", "INHS 12345 Carassius auratus Lake Michigan"),
        ("INHS_FISH_22222", "22222", "Notropis", "atherinoides", "INHS 22222 Carassius auratus Lake Michigan"),
        ("INHS_FISH_33333", "33333", "Lepomis", "macrochirus", "INHS 33333 Lepomis macrochirus Lake Michigan"),
    ];
    let mut media = String::new();
    let mut event = String::new();
    let mut iq = String::new();
    let mut extended = String::new();
    let mut batch = String::new();
    let mut labels = String::new();
    write_row(&mut media, &MEDIA_COLUMNS);
    write_row(&mut event, &EVENT_COLUMNS);
    write_row(&mut iq, &IQ_COLUMNS);
    write_row(&mut extended, &EXTENDED_COLUMNS);
    write_row(&mut batch, &BATCH_COLUMNS);
    write_row(&mut labels, &[KEY_COLUMN, LABEL_COLUMN]);
    for (key, catalog, genus, species, label) in rows {
        write_row(
            &mut media,
            &[key, "CC BY-NC 4.0", "4000", "1500", "image/jpeg", "2019-03-04T10:00:00", "L. M. Page", "", ""],
        );
        write_row(
            &mut event,
            &[
                key,
                catalog,
                "INHS",
                genus,
                species,
                &format!("{genus} {species}"),
                "1954-06-01T00:00:00",
                "Lake Michigan",
                "United States",
                "41.8800",
                "P. W. Smith",
                "",
                "",
            ],
        );
        write_row(&mut iq, &[key, "3200", "1100", "0.120", "true", "2.5", "ok"]);
        write_row(
            &mut extended,
            &[key, "xmp.iid:0000000000000001", &format!("{key}_mask.png"), "4", "4000", "1500", "segmenter 1.2"],
        );
        write_row(&mut labels, &[key, label]);
    }
    write_row(
        &mut batch,
        &[
            BATCH_KEY,
            "Fish specimen image collection",
            "Example Museum Consortium",
            "2021-06-01T00:00:00",
            "JOB-1",
            "Example Museum Consortium",
            "",
        ],
    );
    Corpus {
        media,
        event,
        iq,
        extended,
        batch,
        labels,
    }
}

const RANDOM_PREFIXES: [&str; 8] = ["dwc", "dcterms", "ac", "xmp", "xmpMM", "Iptc4xmpCore", "bgnn", "rdfs"];
const RANDOM_LOCALS: [&str; 6] = ["genus", "title", "x_1", "Creator", "isPartOf", "n"];
const AWKWARD_TEXT: [&str; 10] = [
    "",
    "plain",
    "two words",
    "quote \" inside",
    "back\\slash",
    "line\nbreak\r\ttab",
    "Çafé ñ 魚",
    "<not an iri>",
    " . ",
    "emoji 🐟",
];

fn random_literal(rng: &mut ChaCha8Rng) -> LiteralValue {
    let datatype = Datatype::ALL[rng.gen_range(0..Datatype::ALL.len())];
    let lexical = match datatype {
        Datatype::String => {
            let base = AWKWARD_TEXT[rng.gen_range(0..AWKWARD_TEXT.len())];
            if rng.gen_bool(0.5) {
                format!("{base}{}", rng.gen_range(0..50))
            } else {
                base.to_string()
            }
        }
        Datatype::Integer => rng.gen_range(-1000i64..1000).to_string(),
        Datatype::Decimal => format!("{}.{:02}", rng.gen_range(-90i32..90), rng.gen_range(0..100)),
        Datatype::Boolean => rng.gen_bool(0.5).to_string(),
        Datatype::DateTime => date(rng, 1850, 2020),
        Datatype::AnyUri => format!("http://example.org/doc/{}", rng.gen_range(0..30)),
    };
    LiteralValue::new(lexical, datatype).expect("generated lexical form is valid")
}

/// A graph of up to `max_statements` random statements, deterministic in
/// `seed`. Subjects are ARKs (some with qualifiers) and plain IRIs drawn
/// from a small pool so that subjects recur as objects; objects cover every
/// literal datatype, IRIs, ARKs and blank nodes.
pub fn random_graph(seed: u64, max_statements: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let registry = Arc::new(NamespaceRegistry::default());
    let subject_pool = 2 + (max_statements as f64).sqrt() as usize;
    let subjects: Vec<Node> = (0..subject_pool)
        .map(|i| {
            let class = EntityClass::ALL[i % EntityClass::ALL.len()];
            let ark = mint(DEFAULT_NAAN, class, &format!("R{seed}_{i}")).expect("valid key");
            match i % 7 {
                5 => Node::Ark(ark.child(&format!("seg{i}")).expect("alphanumeric component")),
                6 => Node::iri(format!("http://example.org/thing/{i}")).expect("absolute"),
                _ => Node::Ark(ark),
            }
        })
        .collect();
    let predicates: Vec<Term> = (0..rng.gen_range(2..=10))
        .map(|_| {
            let prefix = RANDOM_PREFIXES[rng.gen_range(0..RANDOM_PREFIXES.len())];
            let local = RANDOM_LOCALS[rng.gen_range(0..RANDOM_LOCALS.len())];
            Term::new(prefix, local).expect("valid term")
        })
        .collect();
    let target = rng.gen_range(0..=max_statements);
    let mut graph = Graph::new(registry);
    for _ in 0..target {
        let subject = subjects[rng.gen_range(0..subjects.len())].clone();
        let predicate = predicates[rng.gen_range(0..predicates.len())].clone();
        let object = match rng.gen_range(0..10) {
            0..=5 => Node::Literal(random_literal(&mut rng)),
            6 | 7 => subjects[rng.gen_range(0..subjects.len())].clone(),
            8 => Node::iri(format!("http://example.org/v/{}", rng.gen_range(0..20))).expect("absolute"),
            _ => Node::blank(format!("_:b{}", rng.gen_range(0..5))).expect("valid label"),
        };
        let stmt = Statement::new(subject, predicate, object).expect("non-blank subject");
        graph.add_statement(stmt).expect("registered prefix");
    }
    graph
}
