// Runs both built-in profiles over the preset batches and prints the
// per-check discrepancy tables.

use parseval::analytics::{discrepancy_table, Predicate};
use parseval::certgen::{self, DefectSpec};
use parseval::harness::{self, ParserRef, RunOptions};
use parseval::x509::ValidationProfile;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut corpus = Vec::new();
    for (name, _, _) in certgen::PRESETS {
        let path = dir.path().join(format!("{name}.b64"));
        certgen::write_batch(&path, &certgen::generate(&DefectSpec::preset(name, 1)?))?;
        corpus.push(path);
    }
    let parsers = [
        ParserRef::builtin("parseval-strict", ValidationProfile::strict()),
        ParserRef::builtin("parseval-lenient", ValidationProfile::lenient()),
    ];
    let store = dir.path().join("store.jsonl");
    let manifest = harness::run_to_files(
        &corpus,
        &parsers,
        &RunOptions::default(),
        &store,
        &dir.path().join("manifest.json"),
    )?;
    let rows = harness::read_store(&store)?;
    println!("run {} over {} certificates, {} error rows", manifest.run_id, manifest.total(), rows.len());
    for check in ["version", "rsa-key", "ec-point"] {
        let t = discrepancy_table(&rows, &manifest, "parseval-strict", &Predicate::CheckId(check.into()))?;
        let cells: Vec<String> = t.counts.iter().map(|(p, n)| format!("{p}={n}")).collect();
        println!("{check:<10} {}", cells.join("  "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
