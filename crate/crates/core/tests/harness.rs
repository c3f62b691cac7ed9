use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use parseval::certgen::{self, DefectId, DefectSpec};
use parseval::harness::store::{count_by_parser, read_rows};
use parseval::harness::{
    self, compact, drive_adapter, ingest, run_adapter, AdapterError, Batch, BatchStatus, ParserRef, ParserSpec,
    RunOptions, Status,
};
use parseval::taxonomy::{ClassificationTable, ErrorCategory};
use parseval::x509::ValidationProfile;

const BIN: &str = env!("CARGO_BIN_EXE_parseval");

fn write_corpus(dir: &Path, specs: &[DefectSpec]) -> Vec<PathBuf> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = dir.join(format!("batch{i:02}-{}.b64", s.defect));
            certgen::write_batch(&path, &certgen::generate(s)).unwrap();
            path
        })
        .collect()
}

fn builtins() -> Vec<ParserRef> {
    vec![
        ParserRef::builtin("parseval-strict", ValidationProfile::strict()),
        ParserRef::builtin("parseval-lenient", ValidationProfile::lenient()),
    ]
}

fn opts(workers: usize) -> RunOptions {
    RunOptions {
        workers,
        timeout: Duration::from_secs(30),
        ..RunOptions::default()
    }
}

fn mixed_specs(per_defect: usize) -> Vec<DefectSpec> {
    DefectId::ALL.iter().map(|d| DefectSpec::new(*d, per_defect, 17).unwrap()).collect()
}

#[test]
fn worker_count_does_not_change_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let batches = harness::load_corpus(&write_corpus(dir.path(), &mixed_specs(40))).unwrap();
    let mut stores = Vec::new();
    let mut manifests = Vec::new();
    for workers in [1, 8] {
        let mut out = Vec::new();
        let m = harness::run(&batches, &builtins(), &opts(workers), &mut out).unwrap();
        stores.push(compact(read_rows(out.as_slice()).unwrap()));
        manifests.push(m);
    }
    assert_eq!(stores[0], stores[1]);
    assert_eq!(manifests[0].run_id, manifests[1].run_id);
    assert_eq!(manifests[0].total(), 40 * DefectId::ALL.len() as u64);
}

#[test]
fn rows_plus_successes_equal_n() {
    let dir = tempfile::tempdir().unwrap();
    let batches = harness::load_corpus(&write_corpus(dir.path(), &mixed_specs(10))).unwrap();
    let mut out = Vec::new();
    let m = harness::run(&batches, &builtins(), &opts(4), &mut out).unwrap();
    let rows = read_rows(out.as_slice()).unwrap();
    let counts = count_by_parser(&rows);
    for p in builtins() {
        let mut successes = 0u64;
        let mut errors = 0u64;
        for b in &batches {
            for o in harness::run_builtin(&p.parser_id, &profile(&p), b, false) {
                match o.status {
                    Status::Ok => successes += 1,
                    Status::Error => errors += 1,
                }
            }
        }
        let rows_for: u64 = counts.get(p.parser_id.as_str()).map_or(0, |c| c.values().sum());
        assert_eq!(rows_for, errors);
        assert_eq!(rows_for + successes, m.evaluated(&p.parser_id));
        assert_eq!(m.evaluated(&p.parser_id), m.total());
    }
    // ground truth: every defect except `none` fails strict; only the DER
    // defects fail lenient
    assert_eq!(counts["parseval-strict"].values().sum::<u64>(), 10 * 14);
    assert_eq!(counts["parseval-lenient"][&ErrorCategory::Asn1ParseError], 10 * 2);
}

fn profile(p: &ParserRef) -> ValidationProfile {
    match &p.kind {
        harness::ParserKind::Builtin(profile) => profile.clone(),
        _ => unreachable!(),
    }
}

#[test]
fn run_to_files_writes_sorted_store_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), &mixed_specs(3));
    let (store, manifest) = (dir.path().join("s.jsonl"), dir.path().join("m.json"));
    let m = harness::run_to_files(&corpus, &builtins(), &opts(2), &store, &manifest).unwrap();
    let rows = harness::read_store(&store).unwrap();
    assert_eq!(rows, compact(rows.clone()));
    assert!(rows.iter().all(|r| r.run_id == m.run_id));
    assert_eq!(harness::RunManifest::load(&manifest).unwrap(), m);
    assert_eq!(m.batches.len(), DefectId::ALL.len());
    assert_eq!(m.batch_runs.len(), 2 * DefectId::ALL.len());
    assert!(m.batch_runs.iter().all(|r| r.status == BatchStatus::Ok && r.attempts == 1));
}

#[test]
fn ingest_keeps_going_past_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let good = certgen::generate(&DefectSpec::new(DefectId::None, 2, 1).unwrap());
    let text = format!(
        "{}\n\nnot*base64\n{}\n=\n",
        base64_of(&good[0].der),
        base64_of(&good[1].der)
    );
    let path = dir.path().join("mixed.b64");
    std::fs::write(&path, text).unwrap();
    let batch = ingest(&path).unwrap();
    assert_eq!(batch.batch_id, "mixed");
    assert_eq!(batch.records.iter().map(|r| r.line_no).collect::<Vec<_>>(), [1, 4]);
    assert_eq!(batch.errors.iter().map(|e| e.line_no).collect::<Vec<_>>(), [3, 5]);
    assert_eq!(batch.records[0].fingerprint, good[0].fingerprint());

    let empty = dir.path().join("empty.b64");
    std::fs::write(&empty, "\n").unwrap();
    assert!(matches!(harness::load_corpus(&[empty]), Err(harness::HarnessError::EmptyBatch(_))));
    assert!(matches!(
        harness::load_corpus(&[path.clone(), path]),
        Err(harness::HarnessError::DuplicateBatch(_))
    ));
}

fn base64_of(der: &[u8]) -> String {
    use base64::Engine;
    base64::engine::general_purpose::STANDARD.encode(der)
}

fn small_batch(dir: &Path) -> Batch {
    let path = dir.join("small.b64");
    let mut certs = certgen::generate(&DefectSpec::new(DefectId::None, 3, 2).unwrap());
    certs.extend(certgen::generate(&DefectSpec::new(DefectId::Truncated, 2, 2).unwrap()));
    certs.extend(certgen::generate(&DefectSpec::new(DefectId::InvalidVersion, 2, 2).unwrap()));
    certgen::write_batch(&path, &certs).unwrap();
    ingest(&path).unwrap()
}

#[test]
fn builtin_adapter_process_matches_in_process_parser() {
    let dir = tempfile::tempdir().unwrap();
    let batch = small_batch(dir.path());
    for name in ["strict", "lenient"] {
        let cmd = format!("{BIN} adapter --profile {name}");
        let parser = ParserSpec::Exec(cmd).resolve(Duration::from_secs(30)).unwrap();
        assert_eq!(parser.parser_id, format!("parseval-{name}"));
        let external = drive_adapter(&parser, &batch, Duration::from_secs(30), &ClassificationTable::builtin()).unwrap();
        let internal = harness::run_builtin(&parser.parser_id, &ValidationProfile::by_name(name).unwrap(), &batch, false);
        assert_eq!(external.len(), internal.len());
        for (e, i) in external.iter().zip(&internal) {
            assert_eq!((e.status, &e.error_string, e.category), (i.status, &i.error_string, i.category));
            assert_eq!((&e.fingerprint, e.line_no), (&i.fingerprint, i.line_no));
        }
    }
}

#[test]
fn external_errors_are_classified_by_table() {
    let dir = tempfile::tempdir().unwrap();
    let batch = small_batch(dir.path());
    let cmd = r"echo 'PARSEVAL-ADAPTER 1 go 1.22'; while read l; do printf 'ERR\t7\tx509: invalid version\n'; done";
    let parser = ParserRef::external("go", "1.22", cmd);
    let out = drive_adapter(&parser, &batch, Duration::from_secs(10), &ClassificationTable::builtin()).unwrap();
    assert_eq!(out.len(), batch.len());
    assert!(out.iter().all(|o| o.category == Some(ErrorCategory::X509ValueError) && o.duration_ns == 7));
}

#[test]
fn adapter_failures() {
    let t = Duration::from_secs(10);
    let inputs = ["AAAA", "BBBB", "CCCC"];

    let short = "echo 'PARSEVAL-ADAPTER 1 x 1'; read l; printf 'OK\\t1\\n'";
    assert!(matches!(run_adapter(short, &inputs, t), Err(AdapterError::LineCount { expected: 3, got: 1 })));

    let extra = "echo 'PARSEVAL-ADAPTER 1 x 1'; for i in 1 2 3 4; do printf 'OK\\t1\\n'; done";
    assert!(matches!(run_adapter(extra, &inputs, t), Err(AdapterError::LineCount { expected: 3, got: 4 })));

    assert!(matches!(run_adapter("echo hello", &inputs, t), Err(AdapterError::Protocol(_))));
    assert!(matches!(run_adapter("true", &inputs, t), Err(AdapterError::NoHandshake)));
    assert!(matches!(
        run_adapter("echo 'PARSEVAL-ADAPTER 1 x 1'; echo garbage", &["A"], t),
        Err(AdapterError::Protocol(_))
    ));
    let failing = "echo 'PARSEVAL-ADAPTER 1 x 1'; while read l; do printf 'OK\\t1\\n'; done; exit 3";
    assert!(matches!(run_adapter(failing, &inputs, t), Err(AdapterError::Exit(_))));

    let start = Instant::now();
    let slow = "echo 'PARSEVAL-ADAPTER 1 x 1'; sleep 30";
    assert!(matches!(run_adapter(slow, &inputs, Duration::from_millis(300)), Err(AdapterError::Timeout(_))));
    assert!(start.elapsed() < Duration::from_secs(5));

    let ok = "echo 'PARSEVAL-ADAPTER 1 x 1'; while read l; do printf 'OK\\t1\\n'; done";
    let session = run_adapter(ok, &inputs, t).unwrap();
    assert_eq!(session.handshake.parser_id, "x");
    assert_eq!(session.responses.len(), 3);
}

#[test]
fn failed_batches_are_recorded_not_counted() {
    let dir = tempfile::tempdir().unwrap();
    let batch = small_batch(dir.path());
    let broken = ParserRef::external("broken", "0", "echo 'PARSEVAL-ADAPTER 1 broken 0'; read l; printf 'OK\\t1\\n'");
    let wrong_id = ParserRef::external("expected", "0", "echo 'PARSEVAL-ADAPTER 1 other 0'; while read l; do printf 'OK\\t1\\n'; done");
    let mut parsers = builtins();
    parsers.push(broken);
    parsers.push(wrong_id);
    let mut out = Vec::new();
    let m = harness::run(std::slice::from_ref(&batch), &parsers, &opts(2), &mut out).unwrap();
    let failed: Vec<_> = m.failures().collect();
    assert_eq!(failed.len(), 2);
    assert!(failed.iter().all(|f| f.attempts == 2 && f.error.is_some()));
    assert_eq!(m.evaluated("broken"), 0);
    assert_eq!(m.evaluated("parseval-strict"), batch.len() as u64);
    assert_eq!(m.failed_batches("expected"), ["small"]);
    let rows = read_rows(out.as_slice()).unwrap();
    assert!(rows.iter().all(|r| r.parser_id.starts_with("parseval-")));
}

#[test]
fn run_rejects_bad_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let batch = small_batch(dir.path());
    let mut out = Vec::new();
    let dup = vec![builtins()[0].clone(), builtins()[0].clone()];
    assert!(matches!(
        harness::run(std::slice::from_ref(&batch), &dup, &opts(1), &mut out),
        Err(harness::HarnessError::DuplicateParser(_))
    ));
    assert!(harness::run(&[], &builtins(), &opts(1), &mut out).is_err());
    assert!(harness::run(std::slice::from_ref(&batch), &[], &opts(1), &mut out).is_err());
    assert!("exec:".parse::<ParserSpec>().is_err());
    assert!("builtin:paranoid".parse::<ParserSpec>().is_err());
    assert!(ParserSpec::Exec("exit 1".into()).resolve(Duration::from_secs(5)).is_err());
}

#[test]
fn per_cert_timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let batch = small_batch(dir.path());
    let strict = ValidationProfile::strict();
    assert!(harness::run_builtin("s", &strict, &batch, false).iter().all(|o| o.duration_ns == 0));
    assert!(harness::run_builtin("s", &strict, &batch, true).iter().any(|o| o.duration_ns > 0));
}
