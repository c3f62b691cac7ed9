//! Runs parsers over batch files and records their failures.
//!
//! Work is split into one job per (parser, batch). Worker threads evaluate
//! jobs and hand complete batches to a single writer, which appends the
//! error rows to the outcome store. Successful parses leave no row; the
//! [`RunManifest`] records how many certificates each parser saw.

pub mod adapter;
pub mod ingest;
pub mod protocol;
pub mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

pub use adapter::{probe, run_adapter, AdapterError, AdapterSession};
pub use ingest::{ingest, Batch, CertRecord, IngestError};
pub use protocol::{serve_adapter, Handshake, Response};
pub use store::{
    compact, compact_file, read_store, BatchEntry, BatchRun, BatchStatus, Duplicate, ParserEntry,
    RunManifest, StoreRow,
};

use crate::taxonomy::{ClassificationTable, ErrorCategory};
use crate::x509::{parse_certificate, ValidationProfile};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// A parser as written on the command line: `builtin:<profile>` or
/// `exec:<command>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParserSpec {
    Builtin(String),
    Exec(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParserSpecError {
    #[error("parser must be `builtin:<profile>` or `exec:<command>`, got {0:?}")]
    Syntax(String),
    #[error("unknown built-in profile {0:?} (expected strict or lenient)")]
    UnknownProfile(String),
}

impl FromStr for ParserSpec {
    type Err = ParserSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("builtin", profile)) => {
                ValidationProfile::by_name(profile)
                    .ok_or_else(|| ParserSpecError::UnknownProfile(profile.to_string()))?;
                Ok(ParserSpec::Builtin(profile.to_ascii_lowercase()))
            }
            Some(("exec", cmd)) if !cmd.trim().is_empty() => Ok(ParserSpec::Exec(cmd.to_string())),
            _ => Err(ParserSpecError::Syntax(s.to_string())),
        }
    }
}

impl fmt::Display for ParserSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParserSpec::Builtin(p) => write!(f, "builtin:{p}"),
            ParserSpec::Exec(c) => write!(f, "exec:{c}"),
        }
    }
}

impl ParserSpec {
    /// Resolves the parser id and version, probing external adapters.
    pub fn resolve(&self, timeout: Duration) -> Result<ParserRef, HarnessError> {
        match self {
            ParserSpec::Builtin(name) => {
                let profile = ValidationProfile::by_name(name)
                    .ok_or_else(|| HarnessError::Usage(format!("unknown profile {name}")))?;
                Ok(ParserRef::builtin(&format!("parseval-{name}"), profile))
            }
            ParserSpec::Exec(cmd) => {
                let hs = probe(cmd, timeout).map_err(|e| HarnessError::Adapter {
                    command: cmd.clone(),
                    source: e,
                })?;
                Ok(ParserRef {
                    parser_id: hs.parser_id,
                    version: hs.version,
                    kind: ParserKind::External(cmd.clone()),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParserKind {
    Builtin(ValidationProfile),
    External(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParserRef {
    pub parser_id: String,
    pub version: String,
    pub kind: ParserKind,
}

impl ParserRef {
    pub fn builtin(parser_id: &str, profile: ValidationProfile) -> Self {
        ParserRef {
            parser_id: parser_id.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            kind: ParserKind::Builtin(profile),
        }
    }

    /// An external adapter whose id and version are already known.
    pub fn external(parser_id: &str, version: &str, command: &str) -> Self {
        ParserRef {
            parser_id: parser_id.to_string(),
            version: version.to_string(),
            kind: ParserKind::External(command.to_string()),
        }
    }

    fn source(&self) -> String {
        match &self.kind {
            ParserKind::Builtin(p) => format!("builtin:{p}"),
            ParserKind::External(cmd) => format!("exec:{cmd}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error,
}

/// Result of one parser on one certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseOutcome {
    pub parser_id: String,
    pub fingerprint: String,
    pub batch_id: String,
    pub line_no: u64,
    pub status: Status,
    /// Empty iff the parse succeeded.
    pub error_string: String,
    pub category: Option<ErrorCategory>,
    pub duration_ns: u64,
}

impl ParseOutcome {
    fn to_row(&self, run_id: &str) -> Option<StoreRow> {
        Some(StoreRow {
            run_id: run_id.to_string(),
            parser_id: self.parser_id.clone(),
            fingerprint: self.fingerprint.clone(),
            batch_id: self.batch_id.clone(),
            line_no: self.line_no,
            error_string: self.error_string.clone(),
            category: self.category?,
            duration_ns: self.duration_ns,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("batch {0} contains no certificates")]
    EmptyBatch(String),
    #[error("batch id {0} appears twice in the corpus")]
    DuplicateBatch(String),
    #[error("parser id {0} appears twice")]
    DuplicateParser(String),
    #[error("adapter `{command}`: {source}")]
    Adapter {
        command: String,
        #[source]
        source: AdapterError,
    },
    #[error("writing outcome store: {0}")]
    Store(#[source] io::Error),
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    /// Per batch, for external adapters.
    pub timeout: Duration,
    /// Time each built-in parse. Off by default so that stores are
    /// reproducible byte for byte.
    pub per_cert_timing: bool,
    pub table: ClassificationTable,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            timeout: DEFAULT_TIMEOUT,
            per_cert_timing: false,
            table: ClassificationTable::builtin(),
        }
    }
}

/// Evaluates the built-in parser over a batch.
pub fn run_builtin(
    parser_id: &str,
    profile: &ValidationProfile,
    batch: &Batch,
    timed: bool,
) -> Vec<ParseOutcome> {
    batch
        .records
        .iter()
        .map(|rec| {
            let start = timed.then(Instant::now);
            let result = parse_certificate(&rec.der, profile);
            let duration_ns = start.map_or(0, |s| s.elapsed().as_nanos() as u64);
            let (status, error_string, category) = match result {
                Ok(_) => (Status::Ok, String::new(), None),
                Err(e) => (Status::Error, e.to_string(), Some(e.category)),
            };
            ParseOutcome {
                parser_id: parser_id.to_string(),
                fingerprint: rec.fingerprint.clone(),
                batch_id: rec.batch_id.clone(),
                line_no: rec.line_no,
                status,
                error_string,
                category,
                duration_ns,
            }
        })
        .collect()
}

/// Sends a batch through an external adapter and classifies its errors.
pub fn drive_adapter(
    parser: &ParserRef,
    batch: &Batch,
    timeout: Duration,
    table: &ClassificationTable,
) -> Result<Vec<ParseOutcome>, AdapterError> {
    let ParserKind::External(command) = &parser.kind else {
        return Ok(Vec::new());
    };
    let lines: Vec<&str> = batch.records.iter().map(|r| r.base64.as_str()).collect();
    let session = run_adapter(command, &lines, timeout)?;
    if session.handshake.parser_id != parser.parser_id {
        return Err(AdapterError::WrongParser {
            expected: parser.parser_id.clone(),
            found: session.handshake.parser_id,
        });
    }
    Ok(batch
        .records
        .iter()
        .zip(session.responses)
        .map(|(rec, response)| {
            let (status, error_string, duration_ns) = match response {
                Response::Ok { duration_ns } => (Status::Ok, String::new(), duration_ns),
                Response::Err {
                    duration_ns,
                    error_string,
                } => (Status::Error, error_string, duration_ns),
            };
            let category = (status == Status::Error)
                .then(|| table.classify(&parser.parser_id, &error_string));
            ParseOutcome {
                parser_id: parser.parser_id.clone(),
                fingerprint: rec.fingerprint.clone(),
                batch_id: rec.batch_id.clone(),
                line_no: rec.line_no,
                status,
                error_string,
                category,
                duration_ns,
            }
        })
        .collect())
}

/// Reads and checks a corpus: every batch non-empty, ids unique.
pub fn load_corpus(paths: &[PathBuf]) -> Result<Vec<Batch>, HarnessError> {
    let mut seen = BTreeSet::new();
    let mut batches = Vec::with_capacity(paths.len());
    for path in paths {
        let batch = ingest(path).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        if batch.is_empty() {
            return Err(HarnessError::EmptyBatch(batch.batch_id));
        }
        if !seen.insert(batch.batch_id.clone()) {
            return Err(HarnessError::DuplicateBatch(batch.batch_id));
        }
        batches.push(batch);
    }
    Ok(batches)
}

/// Deterministic id for a (parsers, corpus, table) combination.
pub fn run_id(parsers: &[ParserRef], batches: &[Batch], table_version: &str) -> String {
    let mut h = Sha256::new();
    for p in parsers {
        h.update(format!("{}\0{}\0{}\n", p.parser_id, p.version, p.source()));
    }
    for b in batches {
        h.update(format!("{}\0", b.batch_id));
        for r in &b.records {
            h.update(&r.fingerprint);
        }
        h.update("\n");
    }
    h.update(table_version);
    hex::encode(&h.finalize()[..8])
}

fn find_duplicates(batches: &[Batch]) -> Vec<Duplicate> {
    let mut seen: BTreeMap<&str, Vec<(String, u64)>> = BTreeMap::new();
    for b in batches {
        for r in &b.records {
            seen.entry(&r.fingerprint)
                .or_default()
                .push((r.batch_id.clone(), r.line_no));
        }
    }
    seen.into_iter()
        .filter(|(_, occ)| occ.len() > 1)
        .map(|(fp, occurrences)| Duplicate {
            fingerprint: fp.to_string(),
            occurrences,
        })
        .collect()
}

struct JobResult {
    parser: usize,
    batch: usize,
    rows: Vec<StoreRow>,
    wall_ns: u64,
    attempts: u32,
    error: Option<String>,
}

fn run_job(
    parser: &ParserRef,
    batch: &Batch,
    opts: &RunOptions,
) -> (Vec<ParseOutcome>, u32, Option<String>) {
    match &parser.kind {
        ParserKind::Builtin(profile) => (
            run_builtin(&parser.parser_id, profile, batch, opts.per_cert_timing),
            1,
            None,
        ),
        ParserKind::External(_) => {
            let mut last = None;
            for attempt in 1..=2 {
                match drive_adapter(parser, batch, opts.timeout, &opts.table) {
                    Ok(outcomes) => return (outcomes, attempt, None),
                    Err(e) => last = Some(e.to_string()),
                }
            }
            (Vec::new(), 2, last)
        }
    }
}

/// Runs every parser over every batch. Error rows are written to `out` as
/// JSON lines in completion order; use [`compact`] for a canonical order.
pub fn run(
    batches: &[Batch],
    parsers: &[ParserRef],
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<RunManifest, HarnessError> {
    if parsers.is_empty() {
        return Err(HarnessError::Usage("at least one parser is required".into()));
    }
    if batches.is_empty() {
        return Err(HarnessError::Usage("at least one batch is required".into()));
    }
    let mut ids = BTreeSet::new();
    for p in parsers {
        if !ids.insert(&p.parser_id) {
            return Err(HarnessError::DuplicateParser(p.parser_id.clone()));
        }
    }
    let mut batch_ids = BTreeSet::new();
    for b in batches {
        if b.is_empty() {
            return Err(HarnessError::EmptyBatch(b.batch_id.clone()));
        }
        if !batch_ids.insert(&b.batch_id) {
            return Err(HarnessError::DuplicateBatch(b.batch_id.clone()));
        }
    }

    let table_version = opts.table.version();
    let run_id = run_id(parsers, batches, &table_version);
    let jobs: Vec<(usize, usize)> = (0..parsers.len())
        .flat_map(|p| (0..batches.len()).map(move |b| (p, b)))
        .collect();
    let workers = opts.workers.clamp(1, jobs.len());
    let next = AtomicUsize::new(0);
    let mut results: Vec<JobResult> = Vec::with_capacity(jobs.len());

    let write_result: io::Result<()> = thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<JobResult>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, next, run_id) = (&jobs, &next, &run_id);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(p, b)) = jobs.get(i) else { break };
                let start = Instant::now();
                let (outcomes, attempts, error) = run_job(&parsers[p], &batches[b], opts);
                let wall_ns = start.elapsed().as_nanos() as u64;
                let rows = outcomes.iter().filter_map(|o| o.to_row(run_id)).collect();
                let result = JobResult {
                    parser: p,
                    batch: b,
                    rows,
                    wall_ns,
                    attempts,
                    error,
                };
                if tx.send(result).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // the single writer: one bulk append per finished batch
        for mut result in rx {
            store::write_rows(out, &result.rows)?;
            result.rows = Vec::new();
            results.push(result);
        }
        out.flush()
    });
    write_result.map_err(HarnessError::Store)?;

    results.sort_by_key(|r| (r.parser, r.batch));
    let batch_runs = results
        .into_iter()
        .map(|r| BatchRun {
            parser_id: parsers[r.parser].parser_id.clone(),
            batch_id: batches[r.batch].batch_id.clone(),
            cert_count: batches[r.batch].len() as u64,
            wall_ns: r.wall_ns,
            attempts: r.attempts,
            status: if r.error.is_some() {
                BatchStatus::Failed
            } else {
                BatchStatus::Ok
            },
            error: r.error,
        })
        .collect();

    Ok(RunManifest {
        run_id,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        table_version,
        workers,
        parsers: parsers
            .iter()
            .map(|p| ParserEntry {
                parser_id: p.parser_id.clone(),
                version: p.version.clone(),
                source: p.source(),
            })
            .collect(),
        batches: batches
            .iter()
            .map(|b| BatchEntry {
                batch_id: b.batch_id.clone(),
                path: b.path.clone(),
                cert_count: b.len() as u64,
                ingest_errors: b.errors.clone(),
            })
            .collect(),
        batch_runs,
        duplicates: find_duplicates(batches),
    })
}

/// Runs and persists: a compacted JSON-lines store and a JSON manifest.
pub fn run_to_files(
    corpus: &[PathBuf],
    parsers: &[ParserRef],
    opts: &RunOptions,
    store_path: &Path,
    manifest_path: &Path,
) -> Result<RunManifest, HarnessError> {
    let batches = load_corpus(corpus)?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    let manifest = {
        let mut out = BufWriter::new(File::create(store_path).map_err(io_err(store_path))?);
        run(&batches, parsers, opts, &mut out)?
    };
    compact_file(store_path).map_err(io_err(store_path))?;
    manifest.save(manifest_path).map_err(io_err(manifest_path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certgen::{generate_one, DefectId};
    use base64::Engine;

    fn batch(id: &str, defects: &[DefectId]) -> Batch {
        let text: String = defects
            .iter()
            .enumerate()
            .map(|(i, d)| {
                base64::engine::general_purpose::STANDARD.encode(generate_one(*d, 3, i).der) + "\n"
            })
            .collect();
        let (records, errors) = ingest::ingest_str(id, &text);
        Batch {
            batch_id: id.into(),
            path: PathBuf::from(format!("{id}.b64")),
            records,
            errors,
        }
    }

    #[test]
    fn parser_specs() {
        assert_eq!("builtin:strict".parse(), Ok(ParserSpec::Builtin("strict".into())));
        assert_eq!("exec:./a --x".parse(), Ok(ParserSpec::Exec("./a --x".into())));
        assert!(matches!("builtin:bogus".parse::<ParserSpec>(), Err(ParserSpecError::UnknownProfile(_))));
        assert!("exec:".parse::<ParserSpec>().is_err());
        assert!("strict".parse::<ParserSpec>().is_err());
        let p = ParserSpec::Builtin("lenient".into()).resolve(DEFAULT_TIMEOUT).unwrap();
        assert_eq!(p.parser_id, "parseval-lenient");
    }

    #[test]
    fn success_is_absence() {
        let b = batch("b", &[DefectId::None, DefectId::InvalidVersion, DefectId::None]);
        let strict = ParserRef::builtin("s", ValidationProfile::strict());
        let mut out = Vec::new();
        let m = run(&[b], &[strict], &RunOptions::default(), &mut out).unwrap();
        let rows = store::read_rows(out.as_slice()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].line_no, 2);
        assert_eq!(rows[0].category, ErrorCategory::X509ValueError);
        assert_eq!(rows[0].run_id, m.run_id);
        assert_eq!(m.total(), 3);
        assert_eq!(m.evaluated("s"), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = batch("b", &[DefectId::None]);
        let p = ParserRef::builtin("s", ValidationProfile::strict());
        let opts = RunOptions::default();
        let mut sink = Vec::new();
        assert!(matches!(run(std::slice::from_ref(&b), &[], &opts, &mut sink), Err(HarnessError::Usage(_))));
        assert!(matches!(
            run(&[b.clone(), b.clone()], std::slice::from_ref(&p), &opts, &mut sink),
            Err(HarnessError::DuplicateBatch(_))
        ));
        assert!(matches!(
            run(std::slice::from_ref(&b), &[p.clone(), p.clone()], &opts, &mut sink),
            Err(HarnessError::DuplicateParser(_))
        ));
        let empty = batch("e", &[]);
        assert!(matches!(run(&[empty], &[p], &opts, &mut sink), Err(HarnessError::EmptyBatch(_))));
    }

    #[test]
    fn duplicates_are_reported() {
        let b = batch("b", &[DefectId::None]);
        let mut twice = b.clone();
        let mut rec = b.records[0].clone();
        rec.line_no = 2;
        twice.records.push(rec);
        let d = find_duplicates(&[twice]);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].occurrences, vec![("b".to_string(), 1), ("b".to_string(), 2)]);
    }
}
