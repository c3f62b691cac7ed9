//! The `parseval` command.
//!
//! Exit codes: 0 success, 1 domain failure (rejected certificate, failed
//! batch, undefined metric), 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use clap::{Args, Parser, Subcommand};

use crate::analytics::{self, Predicate, ReportFormat, ReportOptions};
use crate::certgen::{self, DefectId, DefectSpec};
use crate::harness::{self, ParserSpec, RunManifest, RunOptions};
use crate::taxonomy::ClassificationTable;
use crate::x509::{self, parse_certificate, ValidationProfile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "parseval", version, about = "Differential testing of X.509 certificate parsers")]
pub struct Cli {
    /// Classification table; the built-in table when unset.
    #[arg(long, global = true, env = "PARSEVAL_TABLE")]
    pub table: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse one certificate (DER, PEM or a base64 line) and report the result.
    Parse(ParseArgs),
    /// Generate a synthetic batch with a ground-truth sidecar.
    Gen(GenArgs),
    /// Run parsers over batch files into an outcome store and manifest.
    Run(RunArgs),
    /// Classify parser error strings.
    Classify(ClassifyArgs),
    /// Compute metrics from a store and manifest.
    Report(ReportArgs),
    /// Serve the adapter protocol on stdin/stdout with the built-in parser.
    Adapter(AdapterArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// strict or lenient.
    #[arg(long, default_value = "strict")]
    pub profile: String,
    /// Override one check, e.g. `--set check_version=false`.
    #[arg(long = "set", value_name = "FLAG=BOOL")]
    pub overrides: Vec<String>,
}

impl ProfileArgs {
    fn resolve(&self) -> Result<ValidationProfile, String> {
        let mut p = ValidationProfile::by_name(&self.profile)
            .ok_or_else(|| format!("unknown profile {:?} (expected strict or lenient)", self.profile))?;
        for o in &self.overrides {
            let (name, value) = o
                .split_once('=')
                .ok_or_else(|| format!("override must be FLAG=BOOL, got {o:?}"))?;
            let on: bool = value
                .parse()
                .map_err(|_| format!("override value must be true or false, got {value:?}"))?;
            p.set_flag(name, on).map_err(|e| e.to_string())?;
        }
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Certificate file; stdin when absent or `-`.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Defect to inject (`none` for controls).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub defect: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// A named fixed-size batch such as invalid-version-160.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Batch file to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Ground-truth sidecar; defaults to `<out stem>.truth.jsonl`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Skip the sidecar.
    #[arg(long, conflicts_with = "truth")]
    pub no_truth: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Batch files, or directories of `*.b64` files.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// `builtin:strict`, `builtin:lenient` or `exec:<command>`; repeatable.
    #[arg(long = "parser", required = true)]
    pub parsers: Vec<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "store.jsonl")]
    pub store: PathBuf,
    #[arg(long, default_value = "manifest.json")]
    pub manifest: PathBuf,
    /// Seconds allowed per adapter batch.
    #[arg(long, default_value_t = harness::DEFAULT_TIMEOUT.as_secs())]
    pub timeout: u64,
    /// Record a duration for every built-in parse.
    #[arg(long)]
    pub per_cert_timing: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub parser_id: String,
    /// Error strings; read one per line from stdin when none are given.
    pub errors: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "store.jsonl")]
    pub store: PathBuf,
    #[arg(long, default_value = "manifest.json")]
    pub manifest: PathBuf,
    /// json, text or csv.
    #[arg(long, default_value = "text")]
    pub format: String,
    /// Decimal places for rendered rates.
    #[arg(long, default_value_t = 2)]
    pub decimals: u32,
    /// `<reference parser>:<predicate>` where the predicate is `any`,
    /// `category=<CATEGORY>`, `check=<id>` or `error=<pattern>`; repeatable.
    #[arg(long = "discrepancy", value_name = "PARSER:PREDICATE")]
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AdapterArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Parser id announced in the handshake; `parseval-<profile>` by default.
    #[arg(long)]
    pub parser_id: Option<String>,
}

/// Outcome of a subcommand: exit code plus diagnostics for stderr.
#[derive(Debug)]
enum Failure {
    Domain(String),
    Usage(String),
}

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl ToString) -> Failure {
    Failure::Usage(msg.to_string())
}

fn domain(msg: impl ToString) -> Failure {
    Failure::Domain(msg.to_string())
}

fn load_table(path: Option<&Path>) -> Result<ClassificationTable, Failure> {
    match path {
        Some(p) => ClassificationTable::load(p).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => Ok(ClassificationTable::builtin()),
    }
}

/// DER, PEM or a single base64 line.
pub fn read_certificate_bytes(raw: &[u8]) -> Result<Vec<u8>, String> {
    if raw.first() == Some(&0x30) {
        return Ok(raw.to_vec());
    }
    let text = std::str::from_utf8(raw).map_err(|_| "input is neither DER, PEM nor base64".to_string())?;
    if text.contains("-----BEGIN") {
        return x509::pem_to_der(text).map_err(|e| e.to_string());
    }
    let compact: String = text.split_whitespace().collect();
    if compact.is_empty() {
        return Err("empty input".into());
    }
    STANDARD.decode(compact).map_err(|e| format!("invalid base64: {e}"))
}

fn cmd_parse(args: &ParseArgs, out: &mut dyn Write) -> CmdResult {
    let profile = args.profile.resolve().map_err(usage)?;
    let raw = match &args.input {
        Some(p) if p.as_os_str() != "-" => fs::read(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).map_err(usage)?;
            buf
        }
    };
    let der = read_certificate_bytes(&raw).map_err(usage)?;
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(usage);
    match parse_certificate(&der, &profile) {
        Ok(cert) => {
            w(out, "status: accept".into())?;
            w(out, format!("fingerprint: {}", cert.fingerprint()))?;
            w(out, format!("version: {}", cert.version + 1))?;
            w(out, format!("serial: {:x}", cert.serial))?;
            w(out, format!("issuer: {}", cert.issuer))?;
            w(out, format!("subject: {}", cert.subject))?;
            w(out, format!("not before: {}", cert.not_before.text))?;
            w(out, format!("not after: {}", cert.not_after.text))?;
            w(out, format!("signature algorithm: {}", cert.outer_sig_alg.oid))?;
            w(out, format!("extensions: {}", cert.extensions().len()))?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            w(out, "status: reject".into())?;
            w(out, format!("category: {}", e.category))?;
            if let Some(id) = &e.check_id {
                w(out, format!("check: {id}"))?;
            }
            if let Some(off) = e.offset {
                w(out, format!("offset: {off}"))?;
            }
            w(out, format!("error: {}", e.message))?;
            Ok(EXIT_FAILURE)
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.truth.jsonl"))
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> CmdResult {
    let spec = match (&args.preset, &args.defect) {
        (Some(name), _) => DefectSpec::preset(name, args.seed).map_err(usage)?,
        (None, Some(d)) => {
            let defect: DefectId = d.parse().map_err(usage)?;
            DefectSpec::new(defect, args.count, args.seed).map_err(usage)?
        }
        (None, None) => return Err(usage("either --defect or --preset is required")),
    };
    let certs = certgen::generate(&spec);
    certgen::write_batch(&args.out, &certs).map_err(|e| usage(format!("{}: {e}", args.out.display())))?;
    let mut line = format!("wrote {} {} certificates to {}", certs.len(), spec.defect, args.out.display());
    if !args.no_truth {
        let truth = args.truth.clone().unwrap_or_else(|| sidecar_path(&args.out));
        certgen::write_sidecar(&truth, &certs).map_err(|e| usage(format!("{}: {e}", truth.display())))?;
        line += &format!(", ground truth to {}", truth.display());
    }
    writeln!(out, "{line}").map_err(usage)?;
    Ok(EXIT_OK)
}

/// Files as given; directories expand to their `*.b64` files in name order.
pub fn expand_corpus(paths: &[PathBuf]) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "b64"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn cmd_run(args: &RunArgs, table: ClassificationTable, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let specs: Vec<ParserSpec> = args
        .parsers
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    if args.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    if args.timeout == 0 {
        return Err(usage("--timeout must be at least 1 second"));
    }
    let corpus = expand_corpus(&args.corpus).map_err(usage)?;
    if corpus.is_empty() {
        return Err(usage("the corpus contains no batch files"));
    }
    let mut opts = RunOptions {
        timeout: Duration::from_secs(args.timeout),
        per_cert_timing: args.per_cert_timing,
        table,
        ..RunOptions::default()
    };
    if let Some(w) = args.workers {
        opts.workers = w;
    }
    let parsers = specs
        .iter()
        .map(|s| s.resolve(opts.timeout))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let manifest = harness::run_to_files(&corpus, &parsers, &opts, &args.store, &args.manifest).map_err(|e| match e {
        harness::HarnessError::Store(_) | harness::HarnessError::Adapter { .. } => domain(e),
        _ => usage(e),
    })?;
    let rows = harness::read_store(&args.store).map_err(domain)?;
    let counts = harness::store::count_by_parser(&rows);
    let _ = writeln!(out, "run {}: {} certificates in {} batches", manifest.run_id, manifest.total(), manifest.batches.len());
    for p in &manifest.parsers {
        let errors: u64 = counts.get(p.parser_id.as_str()).map_or(0, |c| c.values().sum());
        let _ = writeln!(out, "  {} {}: {} errors / {} evaluated", p.parser_id, p.version, errors, manifest.evaluated(&p.parser_id));
    }
    for b in &manifest.batches {
        for e in &b.ingest_errors {
            let _ = writeln!(err, "warning: {}:{}: {}", e.batch_id, e.line_no, e.message);
        }
    }
    if !manifest.duplicates.is_empty() {
        let _ = writeln!(err, "warning: {} certificates occur more than once", manifest.duplicates.len());
    }
    let failures: Vec<_> = manifest.failures().collect();
    for f in &failures {
        let _ = writeln!(
            err,
            "error: {} failed on batch {} after {} attempts: {}",
            f.parser_id,
            f.batch_id,
            f.attempts,
            f.error.as_deref().unwrap_or("unknown error")
        );
    }
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_classify(args: &ClassifyArgs, table: &ClassificationTable, out: &mut dyn Write) -> CmdResult {
    let mut show = |s: &str| writeln!(out, "{}\t{s}", table.classify(&args.parser_id, s)).map_err(usage);
    if args.errors.is_empty() {
        for line in io::stdin().lock().lines() {
            show(&line.map_err(usage)?)?;
        }
    } else {
        for e in &args.errors {
            show(e)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> CmdResult {
    let format: ReportFormat = args.format.parse().map_err(usage)?;
    let mut opts = ReportOptions::default();
    for d in &args.discrepancies {
        let (parser, pred) = d
            .split_once(':')
            .ok_or_else(|| usage(format!("discrepancy must be PARSER:PREDICATE, got {d:?}")))?;
        let pred: Predicate = pred.parse().map_err(usage)?;
        opts.discrepancies.push((parser.to_string(), pred));
    }
    let manifest = RunManifest::load(&args.manifest).map_err(|e| usage(format!("{}: {e}", args.manifest.display())))?;
    let rows = harness::read_store(&args.store).map_err(|e| usage(format!("{}: {e}", args.store.display())))?;
    let report = analytics::build_report(&rows, &manifest, &opts).map_err(domain)?;
    out.write_all(analytics::render(&report, format, args.decimals).as_bytes())
        .map_err(usage)?;
    Ok(EXIT_OK)
}

fn cmd_adapter(args: &AdapterArgs) -> CmdResult {
    let profile = args.profile.resolve().map_err(usage)?;
    let id = args
        .parser_id
        .clone()
        .unwrap_or_else(|| format!("parseval-{}", args.profile.profile.to_ascii_lowercase()));
    let stdin = io::stdin().lock();
    let stdout = io::BufWriter::new(io::stdout().lock());
    harness::serve_adapter(&id, &profile, stdin, stdout).map_err(domain)?;
    Ok(EXIT_OK)
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Parse(a) => cmd_parse(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Run(a) => load_table(cli.table.as_deref()).and_then(|t| cmd_run(a, t, out, err)),
        Command::Classify(a) => load_table(cli.table.as_deref()).and_then(|t| cmd_classify(a, &t, out)),
        Command::Report(a) => cmd_report(a, out),
        Command::Adapter(a) => cmd_adapter(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

pub fn main() -> ExitCode {
    let code = run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
