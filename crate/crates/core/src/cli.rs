//! Command-line client.
//!
//! Exit codes: 0 success, 1 unreadable input, 2 encoding failure, 3 network
//! error, 4 server-side error, 5 map/metadata mismatch, 6 source changed
//! since encoding, 7 manifest error, 64 usage error.

use std::fs;
use std::io::{Cursor, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::corpus_db::{load_manifest_documents, CorpusDb, DbError, ManifestError};
use crate::detector::{DetectorConfig, DEFAULT_MAX_GAP, DEFAULT_MIN_REPORT, DEFAULT_SEED_K};
use crate::encoder::{
    encode_document_skipping_lines, validate_utf8, write_fasta, Alphabet, OffsetMap, DEFAULT_ALPHABET_SIZE,
};
use crate::eval::{self, DEFAULT_AS, DEFAULT_KS};
use crate::metadata::{PairwiseMetadata, ResultMetadata};
use crate::ref_filter::{strip_references, RefModel};
use crate::report::{render_html, ReportError};
use crate::service::{self, AppState, ServiceConfig};

pub const DEFAULT_SERVER: &str = "http://127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "pbs", version, about = "Encode documents irreversibly and search them for duplicated passages")]
pub struct Cli {
    /// Alphabet size used for encoding.
    #[arg(long = "a", global = true, default_value_t = DEFAULT_ALPHABET_SIZE)]
    pub alphabet: usize,
    /// Seed length for index lookups.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED_K)]
    pub seed_k: usize,
    /// Shortest duplicate, in words, that is reported.
    #[arg(long, global = true, default_value_t = DEFAULT_MIN_REPORT)]
    pub min_report: usize,
    /// Search service base URL.
    #[arg(long, global = true, env = "PBS_SERVER", default_value = DEFAULT_SERVER)]
    pub server: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode text files into FASTA plus offset-map sidecars.
    Encode(EncodeArgs),
    /// Send an encoded FASTA (search) or zip (pairwise) to the service.
    Submit(SubmitArgs),
    /// Zip several FASTA files and run a pairwise comparison.
    PairwiseSubmit(PairwiseArgs),
    /// Render an HTML report from result metadata and the local map.
    Report(ReportArgs),
    /// Build or inspect a corpus database.
    #[command(subcommand)]
    Db(DbCommand),
    /// Collision and compression measurements.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run the search service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Write outputs here instead of next to each input.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Do not strip reference lines.
    #[arg(long)]
    pub keep_refs: bool,
    /// Reference model file (default: bundled model).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Name of the zip written when several files are encoded.
    #[arg(long, default_value = "bundle.zip")]
    pub zip_name: String,
}

#[derive(Debug, Args)]
pub struct SubmitArgs {
    /// A .fasta file, or a .zip of FASTA files for pairwise comparison.
    pub input: PathBuf,
    /// Where to write the metadata (default: input with .json extension).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairwiseArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Result metadata JSON from submit.
    pub metadata: PathBuf,
    /// Offset map written by encode.
    pub map: PathBuf,
    /// Original text (default: the source named in the map, next to it).
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Output HTML (default: map path with .html extension).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DbCommand {
    /// Build a database from a path<TAB>title<TAB>url manifest.
    Build {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Do not record plaintext paths for reference snippets.
        #[arg(long)]
        no_plaintext: bool,
    },
    /// Print registry statistics.
    Info { db: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// False-positive rate sweep.
    Fp {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS)]
        k: Vec<usize>,
        #[arg(long = "a-list", value_delimiter = ',', default_values_t = DEFAULT_AS)]
        a_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raw size against encoded and indexed size.
    Compress {
        #[arg(long)]
        corpus: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PBS_DB")]
    pub db: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Search body limit in bytes.
    #[arg(long, default_value_t = service::DEFAULT_MAX_SEARCH_BODY)]
    pub max_body: usize,
    /// Pairwise zip limit in bytes.
    #[arg(long, default_value_t = service::DEFAULT_MAX_ZIP_BODY)]
    pub max_zip: usize,
    /// Answer with a job id when a request takes longer than this.
    #[arg(long)]
    pub async_after_ms: Option<u64>,
    /// Include retained reference plaintext in matches.
    #[arg(long)]
    pub snippets: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("encoding failed: {0}")]
    Encoding(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("server returned {status}: {message}")]
    Server { status: u16, message: String },
    #[error("metadata does not match the map: {0}")]
    Mismatch(String),
    #[error("{0}")]
    SourceChanged(String),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Unreadable { .. } => 1,
            Self::Encoding(_) => 2,
            Self::Network(_) => 3,
            Self::Server { .. } => 4,
            Self::Mismatch(_) => 5,
            Self::SourceChanged(_) => 6,
            Self::Manifest(_) => 7,
            Self::Usage(_) => 64,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Unreadable {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "document".into())
}

/// Paths written for one encoded input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBundle {
    pub source_path: PathBuf,
    pub fasta_path: PathBuf,
    pub map_path: PathBuf,
    pub stripped_lines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeOutcome {
    pub bundles: Vec<LocalBundle>,
    pub zip_path: Option<PathBuf>,
}

pub fn cmd_encode(args: &EncodeArgs, alphabet_size: usize) -> Result<EncodeOutcome, CliError> {
    let alphabet = Alphabet::new(alphabet_size).map_err(|e| CliError::Usage(e.to_string()))?;
    let model = match &args.model {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(|_| CliError::Usage(format!("{} is not UTF-8", p.display())))?;
            RefModel::parse(&text).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => RefModel::default(),
    };
    let mut bundles = Vec::new();
    let mut fastas = Vec::new();
    for path in &args.paths {
        let bytes = read(path)?;
        let text = validate_utf8(&bytes).map_err(|e| CliError::Encoding(format!("{}: {e}", path.display())))?;
        let stripped = if args.keep_refs {
            Vec::new()
        } else {
            strip_references(text, &model).ref_lines
        };
        if !stripped.is_empty() {
            let listed: Vec<String> = stripped.iter().map(|l| (l + 1).to_string()).collect();
            eprintln!("{}: left out {} reference line(s): {}", path.display(), stripped.len(), listed.join(","));
        }
        let name = stem(path);
        let doc = encode_document_skipping_lines(name.clone(), text, &alphabet, &stripped);
        let dir = match &args.out_dir {
            Some(d) => d.clone(),
            None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        let fasta_path = dir.join(format!("{name}.fasta"));
        let map_path = dir.join(format!("{name}.map"));
        let fasta = write_fasta(&doc, &name);
        let source_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let map = OffsetMap::for_document(&doc, &source_name, &bytes, alphabet.size(), stripped.clone());
        write(&fasta_path, fasta.as_bytes())?;
        write(&map_path, map.to_tsv().as_bytes())?;
        fastas.push((format!("{name}.fasta"), fasta));
        bundles.push(LocalBundle {
            source_path: path.clone(),
            fasta_path,
            map_path,
            stripped_lines: stripped,
        });
    }
    let zip_path = if fastas.len() > 1 {
        let dir = match &args.out_dir {
            Some(d) => d.clone(),
            None => bundles[0].fasta_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        let zip_path = dir.join(&args.zip_name);
        let entries: Vec<(String, Vec<u8>)> = fastas.into_iter().map(|(n, f)| (n, f.into_bytes())).collect();
        write(&zip_path, &zip_bytes(&entries)?)?;
        Some(zip_path)
    } else {
        None
    };
    Ok(EncodeOutcome { bundles, zip_path })
}

/// Deflated zip of named entries.
pub fn zip_bytes(entries: &[(String, Vec<u8>)]) -> Result<Vec<u8>, CliError> {
    let mut w = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let opts = zip::write::SimpleFileOptions::default().compression_method(zip::CompressionMethod::Deflated);
    for (name, data) in entries {
        w.start_file(name.as_str(), opts)
            .and_then(|_| w.write_all(data).map_err(Into::into))
            .map_err(|e| CliError::Encoding(format!("zip: {e}")))?;
    }
    let cursor = w.finish().map_err(|e| CliError::Encoding(format!("zip: {e}")))?;
    Ok(cursor.into_inner())
}

fn client() -> Result<reqwest::blocking::Client, CliError> {
    reqwest::blocking::Client::builder()
        .connect_timeout(Duration::from_secs(10))
        .timeout(None)
        .build()
        .map_err(|e| CliError::Network(e.to_string()))
}

fn check_status(resp: reqwest::blocking::Response) -> Result<(u16, String), CliError> {
    let status = resp.status().as_u16();
    let body = resp.text().map_err(|e| CliError::Network(e.to_string()))?;
    if !(200..300).contains(&status) {
        let message = serde_json::from_str::<serde_json::Value>(&body)
            .ok()
            .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(String::from))
            .unwrap_or(body);
        return Err(CliError::Server { status, message });
    }
    Ok((status, body))
}

/// POSTs `body` and returns the final JSON text, following a background job
/// to completion if the server hands one out.
fn post(server: &str, route: &str, content_type: &str, body: Vec<u8>) -> Result<String, CliError> {
    let client = client()?;
    let base = server.trim_end_matches('/');
    let resp = client
        .post(format!("{base}/api/v1/{route}"))
        .header(reqwest::header::CONTENT_TYPE, content_type)
        .body(body)
        .send()
        .map_err(|e| CliError::Network(e.to_string()))?;
    let (status, text) = check_status(resp)?;
    if status != 202 {
        return Ok(text);
    }
    let job: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Network(e.to_string()))?;
    let id = job["jobId"].as_str().unwrap_or_default().to_string();
    loop {
        std::thread::sleep(Duration::from_millis(200));
        let resp = client
            .get(format!("{base}/api/v1/jobs/{id}"))
            .send()
            .map_err(|e| CliError::Network(e.to_string()))?;
        let (_, text) = check_status(resp)?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Network(e.to_string()))?;
        match v["state"].as_str() {
            Some("done") => return Ok(serde_json::to_string_pretty(&v["resultMetadata"]).unwrap()),
            Some("failed") => {
                return Err(CliError::Server {
                    status: 500,
                    message: v["error"].as_str().unwrap_or("job failed").to_string(),
                })
            }
            _ => {}
        }
    }
}

fn default_json_path(input: &Path) -> PathBuf {
    input.with_extension("json")
}

pub fn cmd_submit(args: &SubmitArgs, server: &str) -> Result<PathBuf, CliError> {
    let body = read(&args.input)?;
    let is_zip = args
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("zip"));
    let text = if is_zip {
        post(server, "pairwise", "application/zip", body)?
    } else {
        post(server, "search", "text/plain; charset=utf-8", body)?
    };
    let out = args.out.clone().unwrap_or_else(|| default_json_path(&args.input));
    write(&out, text.as_bytes())?;
    Ok(out)
}

pub fn cmd_pairwise(args: &PairwiseArgs, server: &str) -> Result<PathBuf, CliError> {
    let body = if args.inputs.len() == 1 && args.inputs[0].extension().is_some_and(|e| e == "zip") {
        read(&args.inputs[0])?
    } else {
        let mut entries = Vec::new();
        for p in &args.inputs {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            entries.push((name, read(p)?));
        }
        zip_bytes(&entries)?
    };
    let text = post(server, "pairwise", "application/zip", body)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_json_path(&args.inputs[0].with_file_name("pairwise")));
    write(&out, text.as_bytes())?;
    Ok(out)
}

/// Picks the result for `map` out of a search or pairwise metadata file.
fn select_result(json: &str, map: &OffsetMap) -> Result<ResultMetadata, CliError> {
    if let Ok(single) = ResultMetadata::from_json(json) {
        return Ok(single);
    }
    let batch: PairwiseMetadata =
        serde_json::from_str(json).map_err(|e| CliError::Mismatch(format!("unreadable metadata: {e}")))?;
    let wanted = [map.id.clone(), format!("{}.fasta", map.id)];
    batch
        .results
        .into_iter()
        .find(|r| wanted.contains(&r.query_id) || Path::new(&r.query_id).file_stem().is_some_and(|s| s == map.id.as_str()))
        .ok_or_else(|| CliError::Mismatch(format!("no result for document {:?}", map.id)))
}

pub fn cmd_report(args: &ReportArgs) -> Result<PathBuf, CliError> {
    let map_text = String::from_utf8(read(&args.map)?).map_err(|_| CliError::Mismatch("map is not UTF-8".into()))?;
    let map = OffsetMap::parse(&map_text).map_err(|e| CliError::Mismatch(e.to_string()))?;
    let meta_text = String::from_utf8(read(&args.metadata)?).map_err(|_| CliError::Mismatch("metadata is not UTF-8".into()))?;
    let meta = select_result(&meta_text, &map)?;
    let source_path = args
        .source
        .clone()
        .unwrap_or_else(|| args.map.with_file_name(&map.source_name));
    let source = read(&source_path)?;
    let html = render_html(&meta, &source, &map.source_name, &map).map_err(|e| match e {
        ReportError::SourceChanged { .. } => CliError::SourceChanged(e.to_string()),
        ReportError::MapMismatch(m) => CliError::Mismatch(m),
    })?;
    let out = args.out.clone().unwrap_or_else(|| args.map.with_extension("html"));
    write(&out, html.as_bytes())?;
    Ok(out)
}

fn db_error(e: DbError, path: &Path) -> CliError {
    match e {
        DbError::DocumentEncoding(_) | DbError::Index(_) => CliError::Encoding(e.to_string()),
        DbError::Io { .. } => CliError::Unreadable {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        DbError::EmptyCorpus => CliError::Manifest(ManifestError::Empty(path.to_path_buf())),
        other => CliError::Mismatch(other.to_string()),
    }
}

pub fn cmd_db_build(manifest: &Path, out: &Path, keep_paths: bool, alphabet_size: usize) -> Result<CorpusDb, CliError> {
    let alphabet = Alphabet::new(alphabet_size).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut docs = load_manifest_documents(manifest)?;
    if !keep_paths {
        for d in &mut docs {
            d.plaintext_path = None;
        }
    }
    let db = CorpusDb::ingest(docs, &alphabet).map_err(|e| db_error(e, manifest))?;
    db.save(out).map_err(|e| db_error(e, out))?;
    Ok(db)
}

pub fn db_info(db: &CorpusDb) -> String {
    let mut s = format!(
        "documentCount\t{}\ntotalWordCount\t{}\nalphabetSize\t{}\n",
        db.document_count(),
        db.total_words(),
        db.alphabet().size()
    );
    for e in db.registry() {
        s.push_str(&format!("doc\t{}\t{}\t{}\t{}\n", e.doc_id, e.word_count, e.title, e.url));
    }
    s
}

fn load_db(path: &Path) -> Result<CorpusDb, CliError> {
    if !path.exists() {
        return Err(CliError::Unreadable {
            path: path.to_path_buf(),
            message: "no such file".into(),
        });
    }
    CorpusDb::load(path).map_err(|e| db_error(e, path))
}

fn cmd_eval(cmd: &EvalCommand) -> Result<String, CliError> {
    let map_eval = |e: eval::EvalError| match e {
        eval::EvalError::Io { path, source } => CliError::Unreadable {
            path,
            message: source.to_string(),
        },
        eval::EvalError::NotUtf8 { path } => CliError::Encoding(format!("{} is not UTF-8", path.display())),
        other => CliError::Usage(other.to_string()),
    };
    match cmd {
        EvalCommand::Fp { corpus, k, a_list, out } => {
            let docs = eval::read_corpus_dir(corpus).map_err(map_eval)?;
            let texts: Vec<&str> = docs.iter().map(|d| d.1.as_str()).collect();
            let tsv = eval::sweep_tsv(&eval::sweep(&texts, k, a_list).map_err(map_eval)?);
            if let Some(out) = out {
                write(out, tsv.as_bytes())?;
            }
            Ok(tsv)
        }
        EvalCommand::Compress { corpus } => {
            let docs = eval::read_corpus_dir(corpus).map_err(map_eval)?;
            let alphabet = Alphabet::default();
            let mut reports = Vec::new();
            for (name, text) in &docs {
                reports.push(eval::compression_ratio(name, &[text.as_str()], &alphabet).map_err(map_eval)?);
            }
            let all: Vec<&str> = docs.iter().map(|d| d.1.as_str()).collect();
            reports.push(eval::compression_ratio("TOTAL", &all, &alphabet).map_err(map_eval)?);
            Ok(eval::compression_tsv(&reports))
        }
    }
}

fn cmd_serve(args: &ServeArgs, cli: &Cli) -> Result<(), CliError> {
    let db = match &args.db {
        Some(p) => Some(load_db(p)?),
        None => None,
    };
    let config = ServiceConfig {
        detector: DetectorConfig {
            seed_k: cli.seed_k,
            max_gap: DEFAULT_MAX_GAP,
            min_report: cli.min_report,
        },
        max_search_body: args.max_body,
        max_zip_body: args.max_zip,
        async_after: args.async_after_ms.map(Duration::from_millis),
        snippets: args.snippets,
    };
    let addr: SocketAddr = format!("{}:{}", args.bind, args.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad bind address: {e}")))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Network(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Network(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| CliError::Network(e.to_string()))?;
        println!("listening on http://{local}");
        let _ = std::io::stdout().flush();
        let state = AppState::new(db, config);
        service::serve(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::Network(e.to_string()))
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.seed_k == 0 {
        return Err(CliError::Usage("--seed-k must be at least 1".into()));
    }
    match &cli.command {
        Command::Encode(args) => {
            let outcome = cmd_encode(args, cli.alphabet)?;
            for b in &outcome.bundles {
                println!("{}\t{}", b.fasta_path.display(), b.map_path.display());
            }
            if let Some(z) = &outcome.zip_path {
                println!("{}", z.display());
            }
        }
        Command::Submit(args) => println!("{}", cmd_submit(args, &cli.server)?.display()),
        Command::PairwiseSubmit(args) => println!("{}", cmd_pairwise(args, &cli.server)?.display()),
        Command::Report(args) => println!("{}", cmd_report(args)?.display()),
        Command::Db(DbCommand::Build {
            manifest,
            out,
            no_plaintext,
        }) => {
            let db = cmd_db_build(manifest, out, !no_plaintext, cli.alphabet)?;
            print!("{}", db_info(&db));
        }
        Command::Db(DbCommand::Info { db }) => print!("{}", db_info(&load_db(db)?)),
        Command::Eval(cmd) => print!("{}", cmd_eval(cmd)?),
        Command::Serve(args) => cmd_serve(args, &cli)?,
    }
    Ok(())
}

/// Entry point for the `pbs` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
