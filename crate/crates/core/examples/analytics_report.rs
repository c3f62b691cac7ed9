// Builds a report from a small hand-made store and prints it in all three
// formats, plus rate formatting at large scale.

use parseval::analytics::{build_report, error_rate, render, ReportFormat, ReportOptions};
use parseval::harness::{BatchEntry, BatchRun, BatchStatus, ParserEntry, RunManifest, StoreRow};
use parseval::taxonomy::ErrorCategory;

fn manifest(parsers: &[&str], certs: u64) -> RunManifest {
    RunManifest {
        run_id: "example".into(),
        timestamp: String::new(),
        table_version: String::new(),
        workers: 1,
        parsers: parsers
            .iter()
            .map(|p| ParserEntry {
                parser_id: p.to_string(),
                version: "1".into(),
                source: "example".into(),
            })
            .collect(),
        batches: vec![BatchEntry {
            batch_id: "batch".into(),
            path: "batch.b64".into(),
            cert_count: certs,
            ingest_errors: vec![],
        }],
        batch_runs: parsers
            .iter()
            .map(|p| BatchRun {
                parser_id: p.to_string(),
                batch_id: "batch".into(),
                cert_count: certs,
                wall_ns: certs * 40_000,
                attempts: 1,
                status: BatchStatus::Ok,
                error: None,
            })
            .collect(),
        duplicates: vec![],
    }
}

fn row(parser: &str, i: u64, category: ErrorCategory, error: &str) -> StoreRow {
    StoreRow {
        run_id: "example".into(),
        parser_id: parser.into(),
        fingerprint: format!("{i:064x}"),
        batch_id: "batch".into(),
        line_no: i + 1,
        error_string: error.into(),
        category,
        duration_ns: 0,
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let r = error_rate(4_803, 186_576_846)?;
    println!("4803 of 186576846 certificates: {} ({})", r.percent(3), r.r_e);

    let m = manifest(&["alpha", "beta"], 1_000);
    let mut rows = Vec::new();
    for i in 0..30 {
        rows.push(row("alpha", i, ErrorCategory::Asn1ParseError, "bad length"));
    }
    for i in 20..45 {
        rows.push(row("beta", i, ErrorCategory::X509ValueError, "invalid version"));
    }
    let report = build_report(&rows, &m, &ReportOptions::default())?;
    for format in [ReportFormat::Text, ReportFormat::Csv] {
        println!("{}", render(&report, format, 2));
    }
    let json = render(&report, ReportFormat::Json, 2);
    println!("json report: {} bytes", json.len());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
