// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use parseval::analytics::{build_report, discrepancy_table, error_rate, Predicate, ReportOptions};
use parseval::certgen::{self, DefectId, DefectSpec, KeyKind};
use parseval::der::{decode, encode};
use parseval::harness::store::read_rows;
use parseval::harness::{
    self, compact, BatchEntry, BatchRun, BatchStatus, ParserEntry, ParserRef, RunManifest, RunOptions, StoreRow,
};
use parseval::taxonomy::{ClassificationTable, ErrorCategory};
use parseval::x509::curves::{CurveParams, P256};
use parseval::x509::{parse_certificate, ValidationProfile};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn builtins() -> Vec<ParserRef> {
    vec![
        ParserRef::builtin("strict", ValidationProfile::strict()),
        ParserRef::builtin("lenient", ValidationProfile::lenient()),
    ]
}

fn write_batches(dir: &Path, specs: &[DefectSpec]) -> Vec<PathBuf> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = dir.join(format!("b{i:02}-{}.b64", s.defect));
            certgen::write_batch(&path, &certgen::generate(s)).unwrap();
            path
        })
        .collect()
}

fn rate_arithmetic() -> Outcome {
    let n = 186_576_846;
    let gnutls = error_rate(28_875, n).map_err(|e| e.to_string())?.percent(2);
    let openssl = error_rate(4_803, n).map_err(|e| e.to_string())?.percent(3);
    ensure(gnutls == "0.02%", format!("28875/N rendered {gnutls}"))?;
    ensure(openssl == "0.003%", format!("4803/N rendered {openssl}"))?;
    Ok(format!("{gnutls}, {openssl}"))
}

fn category_row_sum() -> Outcome {
    let n = 186_576_846u64;
    let manifest = RunManifest {
        run_id: "synthetic".into(),
        timestamp: String::new(),
        table_version: ClassificationTable::builtin().version(),
        workers: 1,
        parsers: vec![ParserEntry { parser_id: "gnutls".into(), version: "3.8".into(), source: "synthetic".into() }],
        batches: vec![BatchEntry { batch_id: "all".into(), path: "all.b64".into(), cert_count: n, ingest_errors: vec![] }],
        batch_runs: vec![BatchRun {
            parser_id: "gnutls".into(),
            batch_id: "all".into(),
            cert_count: n,
            wall_ns: 0,
            attempts: 1,
            status: BatchStatus::Ok,
            error: None,
        }],
        duplicates: vec![],
    };
    let mut store = Vec::new();
    for (k, c) in [(6_321, ErrorCategory::Asn1ParseError), (12_599, ErrorCategory::X509ParseError), (9_955, ErrorCategory::X509ValueError)] {
        for _ in 0..k {
            store.push(StoreRow {
                run_id: "synthetic".into(),
                parser_id: "gnutls".into(),
                fingerprint: format!("{:064x}", store.len()),
                batch_id: "all".into(),
                line_no: store.len() as u64 + 1,
                error_string: String::new(),
                category: c,
                duration_ns: 0,
            });
        }
    }
    let report = build_report(&store, &manifest, &ReportOptions::default()).map_err(|e| e.to_string())?;
    let d = &report.distributions[0];
    ensure(d.sum() == 28_875 && d.n_e == 28_875, format!("row sums to {}", d.sum()))?;
    ensure(report.rates[0].n_e == 28_875, "rate numerator differs from row sum")?;
    Ok(format!("6321 + 12599 + 9955 = {}", d.sum()))
}

fn preset_discrepancies() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let specs: Vec<DefectSpec> = certgen::PRESETS.iter().map(|p| DefectSpec::preset(p.0, 1).unwrap()).collect();
    let batches = harness::load_corpus(&write_batches(dir.path(), &specs)).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let manifest = harness::run(&batches, &builtins(), &RunOptions::default(), &mut out).map_err(|e| e.to_string())?;
    let rows = read_rows(out.as_slice()).map_err(|e| e.to_string())?;
    let mut cells = Vec::new();
    for (name, defect, count) in certgen::PRESETS {
        let check = defect.strict_check_id().ok_or("preset without a strict check")?;
        let t = discrepancy_table(&rows, &manifest, "strict", &Predicate::CheckId(check.into())).map_err(|e| e.to_string())?;
        let got: Vec<u64> = t.counts.iter().map(|c| c.1).collect();
        ensure(got == [count as u64, 0], format!("{name}: {got:?}"))?;
        cells.push(format!("{}/{}", got[0], got[1]));
    }
    Ok(cells.join(", "))
}

fn taxonomy_fidelity() -> Outcome {
    let table = ClassificationTable::builtin();
    let examples = [
        ("go", "x509: malformed UTCTime", ErrorCategory::Asn1ParseError),
        ("go", "x509: unsupported elliptic curve", ErrorCategory::CryptoUnsupported),
        ("go", "x509: invalid RSA modulus", ErrorCategory::CryptoValueError),
        ("wolfssl", "ok", ErrorCategory::Uncategorized),
        ("go", "x509: cannot parse URI", ErrorCategory::X509ParseError),
        ("mbedtls", "X509 - Unavailable feature, e.g. RSA hashing/encryption combination", ErrorCategory::X509Unsupported),
        ("mbedtls", "X509 - Signature algorithms do not match.", ErrorCategory::X509ValueError),
    ];
    let hits = examples.iter().filter(|(p, e, c)| table.classify(p, e) == *c).count();
    ensure(hits == 7, format!("{hits}/7"))?;
    for (p, e) in [("go", "x509: never seen"), ("mbedtls", "X509 - "), ("unknown", "x509: malformed UTCTime")] {
        ensure(table.classify(p, e) == ErrorCategory::Uncategorized, format!("{p}: {e:?} was categorized"))?;
    }
    Ok("7/7".into())
}

fn der_properties() -> Outcome {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &[42; 32]));
    let strategy = common::tree();
    for i in 0..1000 {
        let v = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let der = encode(&v).map_err(|e| format!("tree {i}: {e}"))?;
        let back = decode(&der).map_err(|e| format!("tree {i}: {e}"))?;
        ensure(back == v, format!("tree {i} changed on round trip"))?;
    }
    let der = certgen::baseline(1, 0, KeyKind::Rsa);
    let corpus = common::mutation_corpus(&der);
    for profile in [ValidationProfile::strict(), ValidationProfile::lenient()] {
        for (label, bytes, _) in &corpus {
            match parse_certificate(bytes, &profile) {
                Err(e) if e.category == ErrorCategory::Asn1ParseError => {}
                Err(e) => return Err(format!("{label}: {}", e.category)),
                Ok(_) => return Err(format!("{label}: accepted")),
            }
        }
    }
    Ok(format!("1000 round trips, {} mutations rejected", corpus.len()))
}

fn ec_oracle() -> Outcome {
    let n = |v: u32| BigUint::from(v);
    let toy = CurveParams::new("toy17", n(17), n(2), n(2), n(5), n(1), n(19)).map_err(|e| e.to_string())?;
    let mut expected = BTreeSet::new();
    for x in 0..17u32 {
        for y in 0..17u32 {
            if (y * y) % 17 == (x * x * x + 2 * x + 2) % 17 {
                expected.insert((x, y));
            }
        }
    }
    let mut accepted = BTreeSet::new();
    for x in 0..17u32 {
        for y in 0..17u32 {
            if toy.check_point(&toy.encode_point(&n(x), &n(y))).is_ok() {
                accepted.insert((x, y));
            }
        }
    }
    ensure(accepted == expected, format!("accepted {accepted:?}, expected {expected:?}"))?;
    ensure(P256.check_point(&P256.generator_point()).is_ok(), "P-256 generator rejected")?;
    let bumped = P256.encode_point(&P256.gx, &((&P256.gy + 1u8) % &P256.p));
    ensure(P256.check_point(&bumped).is_err(), "P-256 generator with y+1 accepted")?;
    Ok(format!("{} affine points", accepted.len()))
}

fn harness_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let specs: Vec<DefectSpec> = DefectId::ALL
        .iter()
        .enumerate()
        .map(|(i, d)| DefectSpec::new(*d, if i == 0 { 662 } else { 667 }, 3).unwrap())
        .collect();
    let batches = harness::load_corpus(&write_batches(dir.path(), &specs)).map_err(|e| e.to_string())?;
    let mut stores = Vec::new();
    let mut manifest = None;
    for workers in [1, 8] {
        let opts = RunOptions { workers, ..RunOptions::default() };
        let mut out = Vec::new();
        manifest = Some(harness::run(&batches, &builtins(), &opts, &mut out).map_err(|e| e.to_string())?);
        stores.push(compact(read_rows(out.as_slice()).map_err(|e| e.to_string())?));
    }
    let manifest = manifest.unwrap();
    ensure(manifest.total() == 10_000, format!("corpus has {} certificates", manifest.total()))?;
    ensure(stores[0] == stores[1], "stores differ between 1 and 8 workers")?;
    for (id, profile) in [("strict", ValidationProfile::strict()), ("lenient", ValidationProfile::lenient())] {
        let rows = stores[0].iter().filter(|r| r.parser_id == id).count() as u64;
        let successes = batches
            .iter()
            .flat_map(|b| &b.records)
            .filter(|r| parse_certificate(&r.der, &profile).is_ok())
            .count() as u64;
        ensure(rows + successes == manifest.evaluated(id), format!("{id}: {rows} + {successes} != {}", manifest.evaluated(id)))?;
    }
    Ok(format!("{} rows, N = 10000", stores[0].len()))
}

fn profile_monotonicity() -> Outcome {
    let strict = ValidationProfile::strict();
    let lenient = ValidationProfile::lenient();
    let mut rejected = (BTreeSet::new(), BTreeSet::new());
    let mut specs: Vec<DefectSpec> = certgen::PRESETS.iter().map(|p| DefectSpec::preset(p.0, 1).unwrap()).collect();
    specs.extend(DefectId::ALL.iter().map(|d| DefectSpec::new(*d, 20, 2).unwrap()));
    for spec in &specs {
        for c in certgen::generate(spec) {
            if parse_certificate(&c.der, &strict).is_err() {
                rejected.0.insert(c.fingerprint());
            }
            if parse_certificate(&c.der, &lenient).is_err() {
                rejected.1.insert(c.fingerprint());
            }
        }
    }
    ensure(!rejected.1.is_empty(), "LENIENT rejected nothing")?;
    ensure(rejected.1.is_subset(&rejected.0), "LENIENT rejects a certificate STRICT accepts")?;
    Ok(format!("STRICT {} >= LENIENT {}", rejected.0.len(), rejected.1.len()))
}

fn throughput() -> Outcome {
    let specs: Vec<DefectSpec> = DefectId::ALL.iter().map(|d| DefectSpec::new(*d, 1000, 8).unwrap()).collect();
    let certs = certgen::generate_corpus(&specs);
    let profile = ValidationProfile::lenient();
    let start = Instant::now();
    let accepted = certs.iter().filter(|c| parse_certificate(&c.der, &profile).is_ok()).count();
    let secs = start.elapsed().as_secs_f64();
    let rate = certs.len() as f64 / secs;
    ensure(accepted > 0, "nothing accepted")?;
    ensure(rate >= 10_000.0, format!("{rate:.0} certificates/s"))?;
    Ok(format!("{rate:.0} certificates/s on one thread"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("error-rate arithmetic", rate_arithmetic, Duration::from_secs(1)),
        ("category row sum", category_row_sum, Duration::from_secs(1)),
        ("preset discrepancy tables", preset_discrepancies, Duration::from_secs(10)),
        ("taxonomy fidelity", taxonomy_fidelity, Duration::from_secs(1)),
        ("DER round trip and mutations", der_properties, Duration::from_secs(30)),
        ("EC point oracle", ec_oracle, Duration::from_secs(5)),
        ("harness determinism", harness_determinism, Duration::from_secs(30)),
        ("profile monotonicity", profile_monotonicity, Duration::MAX),
        ("LENIENT throughput", throughput, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({took:.2?})");
            }
        }
    }
    println!("SKIP  adapter exemplar conformance: the C exemplar is not part of this build");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
