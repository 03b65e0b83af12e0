//! `specimeta`: ingest, crosswalk, graph, validate, export, query and serve.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use specimeta_core::ark::{validate_naan, ArkId, DEFAULT_NAAN};
use specimeta_core::crosswalk::{default_rule_files, load_rules, RuleSet};
use specimeta_core::csv::write_row;
use specimeta_core::export::build_bundle;
use specimeta_core::fixtures::{generate, CorpusSpec};
use specimeta_core::graph::{attach_rights, parse_query, parse_serialized, Graph, Query};
use specimeta_core::ingest::RejectedRow;
use specimeta_core::model::{EntityClass, NamespaceRegistry, Term};
use specimeta_core::pipeline::{parse_labels, validate_events, walk_sources, PipelineRun, SourceInput, Walked, WalkedRecord};
use specimeta_core::graph::{build_entity_graph, EntityInput};
use specimeta_core::validate::{default_label_fields, render_report_csv, Thresholds};
use specimeta_service::AppState;

#[derive(Parser)]
#[command(name = "specimeta", version, about = "Specimen-image metadata pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and crosswalk source tables, reporting rejected rows and issues.
    Ingest(IngestArgs),
    /// Build the entity graph and write its canonical serialization.
    Graph(GraphArgs),
    /// Check OCR label text against collection events and score completeness.
    Validate(ValidateArgs),
    /// Write the zip bundle for one root entity.
    Export(ExportArgs),
    /// Evaluate a basic graph pattern and print one binding per line.
    Query(QueryArgs),
    /// Serve the HTTP API over a graph file.
    Serve(ServeArgs),
    /// Generate a synthetic corpus.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Source table; prefix with `Class=` to skip column-based rule matching.
    #[arg(long = "input", required = true, value_name = "[CLASS=]PATH")]
    inputs: Vec<String>,
    /// Directory of rule CSVs; the built-in rules when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value = "SourceKey")]
    key_column: String,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    sources: SourceArgs,
    /// Write rejected rows and crosswalk issues here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    sources: SourceArgs,
    #[arg(long, env = "SPECIMETA_NAAN", default_value = DEFAULT_NAAN)]
    naan: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rights statement recorded on every Multimedia entity.
    #[arg(long, requires = "license")]
    rights: Option<String>,
    #[arg(long, requires = "rights")]
    license: Option<String>,
    /// Also write the graph with OWL declarations.
    #[arg(long)]
    owl: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// `SourceKey,labelText` table of OCR output.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    sim_threshold: f64,
    #[arg(long, default_value_t = 0.75)]
    pass_threshold: f64,
    /// Terms compared against the label.
    #[arg(long, value_delimiter = ',')]
    fields: Vec<String>,
    #[arg(long, default_value = "SourceKey")]
    key_column: String,
    /// CSV report; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CitationArgs {
    #[arg(long, default_value = "")]
    citation: String,
    #[arg(long, conflicts_with = "citation")]
    citation_file: Option<PathBuf>,
}

impl CitationArgs {
    fn text(&self) -> Result<String> {
        match &self.citation_file {
            Some(p) => read_text(p),
            None => Ok(self.citation.clone()),
        }
    }
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    root: String,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    citation: CitationArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Triple patterns, e.g. `?s dwc:genus "Carassius" . ?s a bgnn:CollectionEvent`.
    #[arg(long)]
    pattern: String,
    /// Variables to print; all when omitted.
    #[arg(long, value_delimiter = ',')]
    select: Vec<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, env = "SPECIMETA_ADDR", default_value = "127.0.0.1:8080")]
    addr: String,
    #[command(flatten)]
    citation: CitationArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 100)]
    records: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_rate: f64,
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad input data; exit 1.
    Data(anyhow::Error),
    /// Finished, but with findings a report describes; exit 1.
    Findings(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Graph(a) => graph(a),
        Command::Validate(a) => validate(a),
        Command::Export(a) => export(a),
        Command::Query(a) => query(a),
        Command::Serve(a) => serve(a),
        Command::Generate(a) => generate_corpus(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Findings(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn load_rulesets(dir: Option<&Path>, registry: &NamespaceRegistry) -> Result<Vec<RuleSet>> {
    let Some(dir) = dir else {
        return default_rule_files()
            .iter()
            .map(|(name, text)| load_rules(text.as_bytes(), registry).with_context(|| format!("built-in rules {name}")))
            .collect();
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading rules directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no rule files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| load_rules(&read_bytes(p)?, registry).with_context(|| format!("rules {}", p.display())))
        .collect()
}

struct LoadedSource {
    name: String,
    class: Option<EntityClass>,
    bytes: Vec<u8>,
}

fn load_sources(args: &SourceArgs) -> Result<Vec<LoadedSource>> {
    args.inputs
        .iter()
        .map(|spec| {
            let (class, path) = match spec.split_once('=') {
                Some((c, p)) if c.parse::<EntityClass>().is_ok() => (Some(c.parse().expect("checked")), p),
                _ => (None, spec.as_str()),
            };
            let path = Path::new(path);
            Ok(LoadedSource {
                name: path.display().to_string(),
                class,
                bytes: read_bytes(path)?,
            })
        })
        .collect()
}

fn walk(args: &SourceArgs, registry: &NamespaceRegistry) -> Result<Walked> {
    let rulesets = load_rulesets(args.rules.as_deref(), registry)?;
    let loaded = load_sources(args)?;
    let sources = loaded
        .iter()
        .map(|s| {
            let ruleset = match s.class {
                Some(c) => Some(
                    rulesets
                        .iter()
                        .find(|r| r.target_class() == c)
                        .ok_or_else(|| anyhow!("no rule set for class {c}"))?,
                ),
                None => None,
            };
            Ok(SourceInput {
                name: &s.name,
                bytes: &s.bytes,
                ruleset,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(walk_sources(&sources, &rulesets, &args.key_column, registry)?)
}

fn build(args: &SourceArgs, naan: &str) -> Result<PipelineRun> {
    let registry = Arc::new(NamespaceRegistry::default());
    let (records, rejected) = walk(args, &registry)?;
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

/// `source,sourceId,rowNumber,kind,field,detail`: rejected rows first, then
/// crosswalk issues.
fn findings_csv(records: &[WalkedRecord], rejected: &[(String, RejectedRow)]) -> String {
    let mut out = String::new();
    write_row(&mut out, &["source", "sourceId", "rowNumber", "kind", "field", "detail"]);
    for (source, row) in rejected {
        write_row(&mut out, &[source.as_str(), "", &row.row_number.to_string(), "RejectedRow", "", &row.reason]);
    }
    for r in records {
        for issue in &r.output.issues {
            write_row(
                &mut out,
                &[r.source_name.as_str(), &r.source_id, "", issue.kind(), issue.field(), &issue.detail()],
            );
        }
    }
    out
}

fn summarize(records: &[WalkedRecord], rejected: &[(String, RejectedRow)]) {
    let issues: usize = records.iter().map(|r| r.output.issues.len()).sum();
    eprintln!(
        "{} records, {} rejected rows, {} crosswalk issues",
        records.len(),
        rejected.len(),
        issues
    );
}

fn ingest(args: IngestArgs) -> Outcome {
    let (records, rejected) = walk(&args.sources, &NamespaceRegistry::default())?;
    summarize(&records, &rejected);
    if let Some(path) = &args.report {
        write_atomic(path, findings_csv(&records, &rejected).as_bytes())?;
    }
    if !rejected.is_empty() {
        return Err(Failure::Findings(format!("{} rows rejected", rejected.len())));
    }
    Ok(())
}

fn graph(args: GraphArgs) -> Outcome {
    validate_naan(&args.naan).map_err(|e| anyhow!("--naan: {e}"))?;
    let mut run = build(&args.sources, &args.naan)?;
    if let (Some(rights), Some(license)) = (&args.rights, &args.license) {
        let media: Vec<ArkId> = run
            .graph
            .entities()
            .into_iter()
            .filter(|(_, c)| *c == EntityClass::Multimedia)
            .map(|(a, _)| a)
            .collect();
        for ark in &media {
            attach_rights(&mut run.graph, ark, rights, license).map_err(anyhow::Error::from)?;
        }
    }
    summarize(&run.records, &run.rejected);
    eprintln!("{} entities, {} statements", run.graph.entities().len(), run.graph.len());
    let bytes = run.graph.serialize().map_err(anyhow::Error::from)?;
    write_output(args.out.as_deref(), &bytes)?;
    if let Some(owl) = &args.owl {
        write_atomic(owl, &run.graph.to_owl().map_err(anyhow::Error::from)?)?;
    }
    if let Some(path) = &args.report {
        write_atomic(path, findings_csv(&run.records, &run.rejected).as_bytes())?;
    }
    if !run.rejected.is_empty() {
        return Err(Failure::Findings(format!("{} rows rejected", run.rejected.len())));
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let bytes = read_bytes(path)?;
    parse_serialized(&bytes, Arc::new(NamespaceRegistry::default())).with_context(|| format!("parsing {}", path.display()))
}

fn validate(args: ValidateArgs) -> Outcome {
    let thresholds = Thresholds::new(args.sim_threshold, args.pass_threshold).map_err(anyhow::Error::from)?;
    let fields: Vec<Term> = if args.fields.is_empty() {
        default_label_fields()
    } else {
        args.fields
            .iter()
            .map(|f| f.trim().parse::<Term>().with_context(|| format!("--fields {f:?}")))
            .collect::<Result<_>>()?
    };
    let graph = load_graph(&args.graph)?;
    let labels = parse_labels(&read_bytes(&args.labels)?, &args.key_column).map_err(anyhow::Error::from)?;
    let reports = validate_events(&graph, &labels, &fields, thresholds, None).map_err(anyhow::Error::from)?;
    let bytes = if args.json {
        let mut s = serde_json::to_string_pretty(&reports).map_err(anyhow::Error::from)?;
        s.push('\n');
        s.into_bytes()
    } else {
        render_report_csv(&reports).into_bytes()
    };
    write_output(args.out.as_deref(), &bytes)?;
    let checked = reports.iter().filter(|r| r.validation.is_some()).count();
    let failed = reports.iter().filter(|r| r.passed() == Some(false)).count();
    eprintln!("{checked} labels checked, {failed} failed");
    if failed > 0 {
        return Err(Failure::Findings(format!("{failed} labels failed validation")));
    }
    Ok(())
}

fn export(args: ExportArgs) -> Outcome {
    let root: ArkId = args.root.parse().map_err(|e| anyhow!("--root: {e}"))?;
    let graph = load_graph(&args.graph)?;
    let bundle = build_bundle(&graph, &root, &args.citation.text()?).map_err(anyhow::Error::from)?;
    write_atomic(&args.out, &bundle.to_zip().map_err(anyhow::Error::from)?)?;
    for m in &bundle.manifest {
        eprintln!("{}  {:>8}  {}", m.sha256, m.len, m.path);
    }
    Ok(())
}

fn query(args: QueryArgs) -> Outcome {
    let graph = load_graph(&args.graph)?;
    let parsed = parse_query(&args.pattern, graph.registry()).map_err(anyhow::Error::from)?;
    let q = Query::new(parsed.patterns().to_vec(), args.select).map_err(anyhow::Error::from)?;
    let mut out = String::new();
    for binding in graph.query(&q) {
        let line: Vec<String> = q
            .select()
            .iter()
            .map(|v| format!("?{v}={}", binding[v].to_ntriples()))
            .collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    std::io::stdout().write_all(out.as_bytes()).map_err(anyhow::Error::from)?;
    Ok(())
}

fn serve(args: ServeArgs) -> Outcome {
    let graph = load_graph(&args.graph)?;
    let state = Arc::new(AppState::new(graph, args.citation.text()?));
    let runtime = tokio::runtime::Runtime::new().map_err(anyhow::Error::from)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .with_context(|| format!("binding {}", args.addr))?;
        eprintln!("listening on {}", listener.local_addr()?);
        specimeta_service::serve(listener, state).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}

fn generate_corpus(args: GenerateArgs) -> Outcome {
    let spec = CorpusSpec {
        record_count: args.records,
        seed: args.seed,
        missing_field_rate: args.missing_rate,
        ocr_noise_rate: args.noise_rate,
        ..CorpusSpec::default()
    };
    let corpus = generate(&spec).map_err(anyhow::Error::from)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (name, text) in corpus.files() {
        write_atomic(&args.out_dir.join(name), text.as_bytes())?;
    }
    eprintln!("wrote {} records to {}", args.records, args.out_dir.display());
    Ok(())
}
