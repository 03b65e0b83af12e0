//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, ExitCode, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specimeta_core::ark::{check_char, mint, ArkError, ArkId, BETANUMERIC, DEFAULT_NAAN};
use specimeta_core::crosswalk::{apply_rules, default_rule_files, load_rules, RuleSet, WalkIssue};
use specimeta_core::export::{build_bundle, descendants, CITATION_TXT, GRAPH_OWL, METADATA_CSV};
use specimeta_core::fixtures::{carassius_corpus, generate, random_graph, Corpus, CorpusSpec};
use specimeta_core::graph::{parse_serialized, vocab, Graph};
use specimeta_core::ingest::parse_record_table;
use specimeta_core::model::{EntityClass, NamespaceRegistry, Node};
use specimeta_core::pipeline::{classify, parse_labels, run_pipeline, validate_events, SourceInput, DEFAULT_KEY_COLUMN};
use specimeta_core::validate::{default_label_fields, validate_label, LabelText, Thresholds};
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn registry() -> Arc<NamespaceRegistry> {
    Arc::new(NamespaceRegistry::default())
}

fn rulesets(reg: &NamespaceRegistry) -> Vec<RuleSet> {
    default_rule_files()
        .iter()
        .map(|(_, t)| load_rules(t.as_bytes(), reg).expect("built-in rules"))
        .collect()
}

fn build(corpus: &Corpus) -> Result<Graph, String> {
    let reg = registry();
    let rules = rulesets(&reg);
    let sources: Vec<SourceInput> = corpus
        .sources()
        .iter()
        .map(|(n, t)| SourceInput::new(n, t.as_bytes()))
        .collect();
    Ok(run_pipeline(&sources, &rules, DEFAULT_KEY_COLUMN, DEFAULT_NAAN, reg).map_err(err)?.graph)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_specimeta"));
    cmd.env_remove("SPECIMETA_NAAN").env_remove("SPECIMETA_ADDR");
    cmd
}

fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    for (name, text) in corpus.files() {
        let path = dir.join(name);
        fs::write(&path, text).map_err(err)?;
        if name != "labels.csv" {
            args.push("--input".to_string());
            args.push(path.display().to_string());
        }
    }
    Ok(args)
}

fn cli_graph(inputs: &[String], out: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let o = bin()
        .arg("graph")
        .args(inputs)
        .args(["--naan", DEFAULT_NAAN, "--out"])
        .arg(out)
        .output()
        .map_err(err)?;
    let elapsed = start.elapsed();
    ensure(o.status.success(), || format!("graph failed: {}", String::from_utf8_lossy(&o.stderr)))?;
    Ok(elapsed)
}

/// Largest resident set of any waited-for child, in bytes.
fn children_max_rss() -> u64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage fills the struct it is given.
    let rc = unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, usage.as_mut_ptr()) };
    assert_eq!(rc, 0, "getrusage failed");
    // SAFETY: initialized by the successful call above.
    let usage = unsafe { usage.assume_init() };
    usage.ru_maxrss as u64 * 1024
}

fn round_trip() -> Outcome {
    let mut statements = 0;
    for seed in 0..200u64 {
        let g = random_graph(seed, 500);
        statements += g.len();
        let bytes = g.serialize().map_err(err)?;
        let back = parse_serialized(&bytes, registry()).map_err(err)?;
        ensure(back == g, || format!("seed {seed}: statement sets differ"))?;
        let again = back.serialize().map_err(err)?;
        ensure(again == bytes, || format!("seed {seed}: reserialization differs"))?;
    }
    Ok(format!("200 graphs, {statements} statements, 0 failures"))
}

fn query_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nonempty = 0;
    for case in 0..100u64 {
        let g = random_graph(10_000 + case, 1000);
        let q = oracle::random_query(&mut rng, &g);
        let got = oracle::rows(&q, &g.query(&q));
        let want = oracle::brute_force(&g, &q);
        ensure(got == want, || {
            format!("case {case}: {} rows vs oracle {} for {:?}", got.len(), want.len(), q.patterns())
        })?;
        if !want.is_empty() {
            nonempty += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("100 cases ({nonempty} non-empty), 0 discrepancies, {:.1}s", elapsed.as_secs_f64()))
}

fn crosswalk() -> Outcome {
    let spec = CorpusSpec {
        record_count: 10_000,
        seed: 3,
        missing_field_rate: 0.2,
        ..CorpusSpec::default()
    };
    let corpus = generate(&spec).map_err(err)?;
    let reg = NamespaceRegistry::default();
    let rules = rulesets(&reg);
    let (mut fields, mut records) = (0usize, 0usize);
    for (name, text) in corpus.sources() {
        let delivery = parse_record_table(text.as_bytes(), DEFAULT_KEY_COLUMN, name).map_err(err)?;
        ensure(delivery.rejected.is_empty(), || format!("{name}: rows rejected"))?;
        let rs = classify(name, &delivery.columns, DEFAULT_KEY_COLUMN, &rules).map_err(err)?;
        for record in &delivery.records {
            let out = apply_rules(rs, &reg, record);
            let blanks = out
                .issues
                .iter()
                .filter(|i| matches!(i, WalkIssue::BlankValue { .. }))
                .count();
            let accounted = out.pairs.len() + out.dropped.len() + blanks;
            ensure(accounted == record.fields.len(), || {
                format!("{name} {}: {} fields, {accounted} accounted", record.source_id, record.fields.len())
            })?;
            let again = apply_rules(rs, &reg, &out.as_record(&record.source_id));
            let noop = again.pairs == out.pairs
                && again.dropped.is_empty()
                && again.issues.iter().all(|i| matches!(i, WalkIssue::CoercionIssue { .. }));
            ensure(noop, || format!("{name} {}: second pass changed output", record.source_id))?;
            fields += record.fields.len();
            records += 1;
        }
    }
    Ok(format!("{records} records, {fields} fields, 0 violations"))
}

const GOLDEN: [&str; 50] = [
    "ark:/99999/fk412rz4p11rvx",
    "ark:/99999/fk4jkkvrtqz89t",
    "ark:/99999/fk445bdr68pmsm",
    "ark:/99999/fk4xgmjj1tr9k2",
    "ark:/99999/fk4h1zn9bj9kf2",
    "ark:/99999/fk4gvxg6pth2qr",
    "ark:/99999/fk476gdn8b2zxn",
    "ark:/99999/fk4ph259w2v619",
    "ark:/99999/fk4crt04gkjw83",
    "ark:/99999/fk4h31gk697qk8",
    "ark:/99999/fk4qjcsgvdpgqc",
    "ark:/99999/fk42f261jn36wm",
    "ark:/99999/fk4f337nvfm3fx",
    "ark:/99999/fk4rnmmg7vknnd",
    "ark:/99999/fk4x060dsvd1mf",
    "ark:/99999/fk4w98t5mtpq4h",
    "ark:/99999/fk4rq001vnt3c9",
    "ark:/99999/fk4br1rv4vbhfd",
    "ark:/99999/fk42ktjq29sz28",
    "ark:/99999/fk4dwjpqzpgzt8",
    "ark:/99999/fk4xkr94f0c45g",
    "ark:/99999/fk45382dkv4b6n",
    "ark:/99999/fk4zh0zs7262s8",
    "ark:/99999/fk4xd7830x9djm",
    "ark:/99999/fk4psm7j590q5h",
    "ark:/99999/fk46fz9css9h24",
    "ark:/99999/fk4d4cvtfjjrch",
    "ark:/99999/fk4wsn56k00k80",
    "ark:/99999/fk4fj0hjcz1k1n",
    "ark:/99999/fk4nhhssgnd5wg",
    "ark:/99999/fk4tcrbb6c650c",
    "ark:/99999/fk4kdbpkqdz4px",
    "ark:/99999/fk4mdg6jqwksmx",
    "ark:/99999/fk4r9hpbvjnw80",
    "ark:/99999/fk4510nkj3s8xm",
    "ark:/99999/fk4sx2p0p02zn1",
    "ark:/99999/fk4qrmpnzs8zzg",
    "ark:/99999/fk417sfw1104h0",
    "ark:/99999/fk4nhppnmfrbs1",
    "ark:/99999/fk4w3sg68bw80c",
    "ark:/99999/fk4djhvcmskssz",
    "ark:/99999/fk45c47msb2pqv",
    "ark:/99999/fk4mq5xqp1z4qr",
    "ark:/99999/fk4nb30snxcdtr",
    "ark:/99999/fk4xg057vnpphb",
    "ark:/99999/fk4g0999bhnq95",
    "ark:/99999/fk4jb9f523zc0x",
    "ark:/99999/fk4x1w5ckw628v",
    "ark:/99999/fk43ggzwr9cw1j",
    "ark:/99999/fk45cjjk0zph90",
];

fn ark_integrity() -> Outcome {
    let mut seen = HashSet::with_capacity(100_000);
    for i in 0..100_000 {
        let ark = mint(DEFAULT_NAAN, EntityClass::Multimedia, &format!("K{i}")).map_err(err)?;
        let parsed: ArkId = ark.to_string().parse().map_err(err)?;
        ensure(parsed == ark, || format!("{ark} does not re-parse"))?;
        ensure(seen.insert(ark.clone()), || format!("collision at {ark}"))?;
    }
    let example = check_char("99999", "fk40000000000");
    ensure(example == 'q', || format!("check char example gave {example:?}"))?;

    let (mut tried, mut caught) = (0usize, 0usize);
    for (i, text) in GOLDEN.iter().enumerate() {
        let minted = mint(DEFAULT_NAAN, EntityClass::Multimedia, &format!("GOLD{i:02}")).map_err(err)?;
        ensure(minted.to_string() == *text, || format!("GOLD{i:02} minted {minted}, expected {text}"))?;
        let start = "ark:/".len();
        for pos in start..text.len() {
            let original = text.as_bytes()[pos];
            if original == b'/' {
                continue;
            }
            let naan_digit = pos < start + 5;
            for &sub in BETANUMERIC {
                if sub == original || (naan_digit && !sub.is_ascii_digit()) {
                    continue;
                }
                let mut bytes = text.as_bytes().to_vec();
                bytes[pos] = sub;
                let tampered = String::from_utf8(bytes).expect("ascii");
                tried += 1;
                if matches!(tampered.parse::<ArkId>(), Err(ArkError::BadCheckChar { .. })) {
                    caught += 1;
                }
            }
        }
    }
    let rate = caught as f64 / tried as f64;
    ensure(rate >= 0.95, || format!("detected {caught}/{tried}"))?;
    Ok(format!(
        "100000 distinct mints verify, example 'q' ok, {caught}/{tried} substitutions detected ({:.1}%)",
        rate * 100.0
    ))
}

fn pipeline_scale() -> Outcome {
    let dir = TempDir::new().map_err(err)?;
    let spec = CorpusSpec {
        record_count: 10_000,
        seed: 5,
        missing_field_rate: 0.1,
        ..CorpusSpec::default()
    };
    let inputs = write_corpus(&generate(&spec).map_err(err)?, dir.path())?;
    let (first, second) = (dir.path().join("graph.nt"), dir.path().join("graph2.nt"));
    let t1 = cli_graph(&inputs, &first)?;
    let t2 = cli_graph(&inputs, &second)?;
    let rss = children_max_rss();
    let slowest = t1.max(t2);
    ensure(slowest < Duration::from_secs(60), || format!("took {slowest:?}"))?;
    ensure(rss < 1 << 30, || format!("peak RSS {} MiB", rss >> 20))?;
    let (a, b) = (fs::read(&first).map_err(err)?, fs::read(&second).map_err(err)?);
    ensure(a == b, || "rerun produced different graph.nt".into())?;
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    Ok(format!(
        "10000 records, {lines} statements, {:.1}s, peak RSS {} MiB, rerun identical",
        slowest.as_secs_f64(),
        rss >> 20
    ))
}

fn http_get(addr: &str, path: &str) -> Result<Vec<u8>, String> {
    let mut stream = TcpStream::connect(addr).map_err(err)?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").map_err(err)?;
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).map_err(err)?;
    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .ok_or("no header terminator")?;
    let head = String::from_utf8_lossy(&raw[..split]).to_lowercase();
    ensure(head.starts_with("http/1.1 200"), || format!("GET {path}: {}", head.lines().next().unwrap_or("")))?;
    ensure(!head.contains("transfer-encoding: chunked"), || "chunked response".into())?;
    Ok(raw[split + 4..].to_vec())
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn bundle_conformance() -> Outcome {
    let dir = TempDir::new().map_err(err)?;
    let spec = CorpusSpec {
        record_count: 60,
        seed: 6,
        ..CorpusSpec::default()
    };
    let inputs = write_corpus(&generate(&spec).map_err(err)?, dir.path())?;
    let graph_path = dir.path().join("graph.nt");
    cli_graph(&inputs, &graph_path)?;
    let graph = parse_serialized(&fs::read(&graph_path).map_err(err)?, registry()).map_err(err)?;
    let citation = "Synthetic fish image collection.";

    let mut child = bin()
        .args(["serve", "--addr", "127.0.0.1:0", "--citation", citation, "--graph"])
        .arg(&graph_path)
        .stderr(Stdio::piped())
        .spawn()
        .map_err(err)?;
    let stderr = child.stderr.take().ok_or("no stderr")?;
    let server = Server(child);
    let mut line = String::new();
    BufReader::new(stderr).read_line(&mut line).map_err(err)?;
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .ok_or_else(|| format!("unexpected serve output {line:?}"))?
        .to_string();

    let roots: Vec<(ArkId, EntityClass)> = graph
        .entities()
        .into_iter()
        .filter(|(_, c)| *c != EntityClass::Batch)
        .step_by(7)
        .collect();
    for (root, _) in &roots {
        let bundle = build_bundle(&graph, root, citation).map_err(err)?;
        let selected = descendants(&graph, root);
        let mut kinds = BTreeSet::new();
        let mut xml = 0;
        for (path, _) in &bundle.entries {
            match path.as_str() {
                METADATA_CSV | CITATION_TXT | GRAPH_OWL => {
                    kinds.insert(path.clone());
                }
                p if p.ends_with(".xml") => {
                    xml += 1;
                    kinds.insert("xml".into());
                }
                other => return Err(format!("{root}: unexpected entry {other}")),
            }
        }
        ensure(kinds.len() == 4 && xml == selected.len(), || {
            format!("{root}: kinds {kinds:?}, {xml} xml for {} entities", selected.len())
        })?;
        let bytes = bundle.to_zip().map_err(err)?;
        let rebuilt = build_bundle(&graph, root, citation).map_err(err)?.to_zip().map_err(err)?;
        ensure(bytes == rebuilt, || format!("{root}: bundle not reproducible"))?;

        let zip_path = dir.path().join("b.zip");
        let o = bin()
            .args(["export", "--citation", citation, "--root", &root.to_string(), "--graph"])
            .arg(&graph_path)
            .arg("--out")
            .arg(&zip_path)
            .output()
            .map_err(err)?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        let cli = fs::read(&zip_path).map_err(err)?;
        let served = http_get(&addr, &format!("/api/v1/bundles/{root}.zip"))?;
        ensure(cli == bytes, || format!("{root}: CLI bytes differ from build_bundle"))?;
        ensure(served == cli, || format!("{root}: service bytes differ from CLI"))?;
    }
    drop(server);
    Ok(format!("{} roots: four kinds, reproducible, service == CLI", roots.len()))
}

fn validation() -> Outcome {
    let spec = CorpusSpec {
        record_count: 1000,
        seed: 7,
        ocr_noise_rate: 0.0,
        ..CorpusSpec::default()
    };
    let corpus = generate(&spec).map_err(err)?;
    let graph = build(&corpus)?;
    let labels = parse_labels(corpus.labels.as_bytes(), DEFAULT_KEY_COLUMN).map_err(err)?;
    let reports =
        validate_events(&graph, &labels, &default_label_fields(), Thresholds::default(), None).map_err(err)?;
    let passed = reports.iter().filter(|r| r.passed() == Some(true)).count();
    ensure(passed == 1000 && reports.len() == 1000, || format!("{passed}/{} clean labels pass", reports.len()))?;

    let fixture = carassius_corpus();
    let graph = build(&fixture)?;
    let labels = parse_labels(fixture.labels.as_bytes(), DEFAULT_KEY_COLUMN).map_err(err)?;
    let notropis = mint(DEFAULT_NAAN, EntityClass::CollectionEvent, "INHS_FISH_22222").map_err(err)?;
    let event = graph.entity(&notropis).ok_or("Notropis event missing")?;
    let label = LabelText::new(labels["INHS_FISH_22222"].as_str());
    let report = validate_label(&label, &event, &default_label_fields(), Thresholds::default()).map_err(err)?;
    ensure(!report.pass, || format!("Notropis fixture passed with score {}", report.score))?;
    let lenient = Thresholds::new(0.8, 0.3).map_err(err)?;
    let relaxed = validate_label(&label, &event, &default_label_fields(), lenient).map_err(err)?;
    ensure(relaxed.pass, || "pass threshold 0.3 did not change the outcome".into())?;

    // catalogNumber 12345 against "12346": one edit in five characters.
    let carassius = mint(DEFAULT_NAAN, EntityClass::CollectionEvent, "INHS_FISH_12345").map_err(err)?;
    let event = graph.entity(&carassius).ok_or("Carassius event missing")?;
    let catalog = vec!["dwc:catalogNumber".parse().map_err(err)?];
    let boundary = LabelText::new("INHS 12346");
    let at = validate_label(&boundary, &event, &catalog, Thresholds::default()).map_err(err)?;
    let check = &at.checked_fields[0];
    ensure(check.best_similarity == 0.8 && check.matched, || format!("boundary case: {check:?}"))?;
    let strict = Thresholds::new(0.81, 0.75).map_err(err)?;
    let above = validate_label(&boundary, &event, &catalog, strict).map_err(err)?;
    ensure(!above.checked_fields[0].matched, || "0.81 threshold still matched".into())?;
    Ok(format!(
        "1000/1000 clean labels pass, Notropis fixture fails (score {:.2}), boundary 0.8 matched",
        report.score
    ))
}

/// Independent walk: every image child has exactly one isPartOf, to a
/// Multimedia node, and every Multimedia is reachable from a Batch by hasPart.
fn walk_violations(graph: &Graph) -> Vec<String> {
    let mut out = Vec::new();
    let is_part_of = vocab::is_part_of();
    let has_part = vocab::has_part();
    let entities = graph.entities();
    let mut queue: VecDeque<Node> = entities
        .iter()
        .filter(|(_, c)| *c == EntityClass::Batch)
        .map(|(a, _)| Node::Ark(a.clone()))
        .collect();
    let mut reached: HashSet<Node> = queue.iter().cloned().collect();
    while let Some(n) = queue.pop_front() {
        for next in graph.objects(&n, &has_part) {
            if reached.insert(next.clone()) {
                queue.push_back(next.clone());
            }
        }
    }
    for (ark, class) in &entities {
        let node = Node::Ark(ark.clone());
        match class {
            EntityClass::IQMetadata | EntityClass::ExtendedImageMetadata | EntityClass::CollectionEvent => {
                let parents: Vec<&Node> = graph.objects(&node, &is_part_of).collect();
                let ok = parents.len() == 1
                    && parents[0].as_ark().and_then(|p| graph.class_of(p)) == Some(EntityClass::Multimedia);
                if !ok {
                    out.push(format!("{ark} ({class}) has parents {parents:?}"));
                }
            }
            EntityClass::Multimedia if !reached.contains(&node) => out.push(format!("{ark} unreachable from Batch")),
            _ => {}
        }
    }
    out
}

fn topology() -> Outcome {
    let mut entities = 0;
    for (seed, missing) in [(8, 0.0), (9, 0.2), (10, 0.6)] {
        let spec = CorpusSpec {
            record_count: 2000,
            seed,
            missing_field_rate: missing,
            ..CorpusSpec::default()
        };
        let graph = build(&generate(&spec).map_err(err)?)?;
        let violations = walk_violations(&graph);
        ensure(violations.is_empty(), || {
            format!("seed {seed}: {} violations, first {}", violations.len(), violations[0])
        })?;
        entities += graph.entities().len();
    }
    let graph = build(&carassius_corpus())?;
    ensure(walk_violations(&graph).is_empty(), || "fixture corpus violates topology".into())?;
    Ok(format!("3 corpora, {entities} entities, 0 violations"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("round-trip", round_trip),
        ("query oracle equivalence", query_oracle),
        ("crosswalk totality and idempotence", crosswalk),
        ("ARK integrity", ark_integrity),
        ("pipeline scale", pipeline_scale),
        ("bundle conformance", bundle_conformance),
        ("validation fixture", validation),
        ("structural invariants", topology),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
