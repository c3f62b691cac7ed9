use std::path::Path;
use std::process::{Command, Output, Stdio};

use std::io::Write;

const BIN: &str = env!("CARGO_BIN_EXE_parseval");

fn parseval(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("PARSEVAL_TABLE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn parse_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&parseval(d, &["gen", "--defect", "none", "--out", "ok.b64"])), 0);
    assert_eq!(code(&parseval(d, &["gen", "--defect", "invalid-version", "--out", "v.b64", "--no-truth"])), 0);

    let ok = parseval(d, &["parse", "--profile", "strict", "ok.b64"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("status: accept"));

    let bad = parseval(d, &["parse", "--profile", "strict", "v.b64"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("X509_VALUE_ERROR"));
    assert!(stdout(&bad).contains("check: version"));
    assert_eq!(code(&parseval(d, &["parse", "--profile", "lenient", "v.b64"])), 0);
    assert_eq!(code(&parseval(d, &["parse", "--set", "check_version=false", "v.b64"])), 1);
    assert_eq!(code(&parseval(d, &["parse", "--profile", "strict", "--set", "check_version=false", "--set", "check_extensions_require_v3=false", "v.b64"])), 0);

    // DER and PEM inputs
    let b64 = std::fs::read_to_string(d.join("v.b64")).unwrap();
    use base64::Engine;
    let der = base64::engine::general_purpose::STANDARD.decode(b64.trim()).unwrap();
    std::fs::write(d.join("v.der"), &der).unwrap();
    std::fs::write(d.join("v.pem"), parseval::x509::der_to_pem(&der)).unwrap();
    assert_eq!(code(&parseval(d, &["parse", "v.der"])), 1);
    assert_eq!(code(&parseval(d, &["parse", "v.pem"])), 1);

    let mut child = Command::new(BIN)
        .args(["parse", "--profile", "lenient"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b64.as_bytes()).unwrap();
    assert!(child.wait_with_output().unwrap().status.success());

    assert_eq!(code(&parseval(d, &["parse", "missing.der"])), 2);
    std::fs::write(d.join("junk"), "%%%").unwrap();
    assert_eq!(code(&parseval(d, &["parse", "junk"])), 2);
    assert_eq!(code(&parseval(d, &["parse", "--profile", "paranoid", "ok.b64"])), 2);
    assert_eq!(code(&parseval(d, &["parse", "--set", "nonsense=true", "ok.b64"])), 2);
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a.b64", "b.b64"] {
        let o = parseval(d, &["gen", "--defect", "invalid-version", "--count", "160", "--seed", "1", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(d.join("a.b64")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.b64")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 160);
    assert_eq!(
        std::fs::read(d.join("a.truth.jsonl")).unwrap(),
        std::fs::read(d.join("b.truth.jsonl")).unwrap()
    );
    let control = parseval(d, &["gen", "--defect", "none", "--count", "10", "--out", "c.b64"]);
    assert_eq!(code(&control), 0);
    assert_eq!(std::fs::read_to_string(d.join("c.b64")).unwrap().lines().count(), 10);

    assert_eq!(code(&parseval(d, &["gen", "--defect", "bogus", "--out", "x.b64"])), 2);
    assert_eq!(code(&parseval(d, &["gen", "--defect", "none", "--count", "0", "--out", "x.b64"])), 2);
    assert_eq!(code(&parseval(d, &["gen", "--out", "x.b64"])), 2);
    assert_eq!(code(&parseval(d, &["gen", "--preset", "nope", "--out", "x.b64"])), 2);
}

#[test]
fn run_and_report_presets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir(d.join("corpus")).unwrap();
    for p in ["invalid-version-160", "rsa-bad-exponent-264", "ec-bad-point-17"] {
        let out = format!("corpus/{p}.b64");
        assert_eq!(code(&parseval(d, &["gen", "--preset", p, "--out", &out])), 0);
    }
    let mut stores = Vec::new();
    for workers in ["1", "8"] {
        let store = format!("store{workers}.jsonl");
        let o = parseval(
            d,
            &[
                "run", "corpus", "--parser", "builtin:strict", "--parser", "builtin:lenient", "--workers", workers,
                "--store", &store, "--manifest", "manifest.json",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stores.push(std::fs::read(d.join(&store)).unwrap());
    }
    assert_eq!(stores[0], stores[1]);

    let report = parseval(
        d,
        &[
            "report", "--store", "store1.jsonl", "--format", "json",
            "--discrepancy", "parseval-strict:check=version",
            "--discrepancy", "parseval-strict:check=rsa-key",
            "--discrepancy", "parseval-strict:check=ec-point",
        ],
    );
    assert_eq!(code(&report), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&report)).unwrap();
    let tables = json["discrepancies"].as_array().unwrap();
    let got: Vec<(u64, u64)> = tables
        .iter()
        .map(|t| (t["counts"][0][1].as_u64().unwrap(), t["counts"][1][1].as_u64().unwrap()))
        .collect();
    assert_eq!(got, [(160, 0), (264, 0), (17, 0)]);
    assert_eq!(json["N"], 441);

    for format in ["text", "csv"] {
        let o = parseval(d, &["report", "--store", "store1.jsonl", "--format", format]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("parseval-strict"));
    }
    assert_eq!(code(&parseval(d, &["report", "--store", "store1.jsonl", "--format", "xml"])), 2);
    assert_eq!(code(&parseval(d, &["report", "--store", "store1.jsonl", "--discrepancy", "ghost:any"])), 1);
    assert_eq!(code(&parseval(d, &["report", "--store", "store1.jsonl", "--discrepancy", "nocolon"])), 2);
    assert_eq!(code(&parseval(d, &["report", "--store", "missing.jsonl"])), 2);
}

#[test]
fn report_on_empty_run_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("store.jsonl"), "").unwrap();
    let manifest = serde_json::json!({
        "run_id": "0", "timestamp": "", "table_version": "", "workers": 1,
        "parsers": [{"parser_id": "p", "version": "1", "source": "builtin:strict"}],
        "batches": [], "batch_runs": [], "duplicates": []
    });
    std::fs::write(d.join("manifest.json"), manifest.to_string()).unwrap();
    let o = parseval(d, &["report"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("N = 0"));
}

#[test]
fn run_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    parseval(d, &["gen", "--defect", "none", "--count", "2", "--out", "a.b64"]);
    assert_eq!(code(&parseval(d, &["run", "a.b64"])), 2);
    assert_eq!(code(&parseval(d, &["run", "a.b64", "--parser", "magic"])), 2);
    assert_eq!(code(&parseval(d, &["run", "a.b64", "--parser", "builtin:strict", "--workers", "0"])), 2);
    assert_eq!(code(&parseval(d, &["run", "missing.b64", "--parser", "builtin:strict"])), 2);
    std::fs::create_dir(d.join("empty")).unwrap();
    assert_eq!(code(&parseval(d, &["run", "empty", "--parser", "builtin:strict"])), 2);
    assert_eq!(code(&parseval(d, &["frobnicate"])), 2);
    assert_eq!(code(&parseval(d, &[])), 2);
    assert_eq!(code(&parseval(d, &["--help"])), 0);
}

#[test]
fn failed_adapter_batch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    parseval(d, &["gen", "--defect", "none", "--count", "2", "--out", "a.b64"]);
    let o = parseval(
        d,
        &["run", "a.b64", "--parser", "builtin:lenient", "--parser", "exec:echo 'PARSEVAL-ADAPTER 1 flaky 1'", "--timeout", "5"],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("flaky failed on batch a"));
    let m = parseval::harness::RunManifest::load(d.join("manifest.json")).unwrap();
    assert_eq!(m.evaluated("flaky"), 0);
    assert_eq!(m.evaluated("parseval-lenient"), 2);
}

#[test]
fn classify_uses_table_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = parseval(d, &["classify", "--parser-id", "go", "x509: invalid version", "something else"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "X509_VALUE_ERROR\tx509: invalid version\nUNCATEGORIZED\tsomething else\n");

    std::fs::write(d.join("t.tsv"), "parseval-table 1\ngo\tsomething*\tCRYPTO_UNSUPPORTED\n").unwrap();
    let o = Command::new(BIN)
        .args(["classify", "--parser-id", "go", "something else", "x509: invalid version"])
        .current_dir(d)
        .env("PARSEVAL_TABLE", "t.tsv")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "CRYPTO_UNSUPPORTED\tsomething else\nUNCATEGORIZED\tx509: invalid version\n");

    std::fs::write(d.join("bad.tsv"), "not a table\n").unwrap();
    let o = Command::new(BIN)
        .args(["classify", "--parser-id", "go", "x"])
        .current_dir(d)
        .env("PARSEVAL_TABLE", "bad.tsv")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);

    let mut child = Command::new(BIN)
        .args(["classify", "--parser-id", "gnutls"])
        .current_dir(d)
        .env_remove("PARSEVAL_TABLE")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"Duplicate extension in X.509 certificate.\nASN1 parser: Error in DER parsing.\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().map(|l| l.split('\t').next().unwrap()).collect::<Vec<_>>(),
        ["X509_VALUE_ERROR", "ASN1_PARSE_ERROR"]
    );
}

#[test]
fn adapter_subcommand_speaks_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    parseval(d, &["gen", "--defect", "truncated", "--count", "3", "--out", "t.b64"]);
    let input = std::fs::read(d.join("t.b64")).unwrap();
    let mut child = Command::new(BIN)
        .args(["adapter", "--profile", "lenient", "--parser-id", "mine"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&input).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("PARSEVAL-ADAPTER 1 mine "));
    assert!(lines[1..].iter().all(|l| l.starts_with("ERR\t") && l.split('\t').count() == 3));
}
