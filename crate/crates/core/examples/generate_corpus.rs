// Writes one batch file and ground-truth sidecar per defect, plus the
// fixed-size preset batches.
//
// cargo run --example generate_corpus -- [out-dir] [count] [seed]

use std::path::Path;

use parseval::certgen::{self, DefectId, DefectSpec};

pub fn generate_into(out: &Path, count: usize, seed: u64) -> Result<usize, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out)?;
    let mut files = 0;
    for defect in DefectId::ALL {
        let certs = certgen::generate(&DefectSpec::new(defect, count, seed)?);
        certgen::write_batch(out.join(format!("{defect}.b64")), &certs)?;
        certgen::write_sidecar(out.join(format!("{defect}.truth.jsonl")), &certs)?;
        let truth = defect.ground_truth();
        println!("{defect:<22} {count:>5} certs  lenient={:<20} strict={}", truth.lenient, truth.strict);
        files += 1;
    }
    for (name, _, _) in certgen::PRESETS {
        let certs = certgen::generate(&DefectSpec::preset(name, seed)?);
        certgen::write_batch(out.join(format!("{name}.b64")), &certs)?;
        certgen::write_sidecar(out.join(format!("{name}.truth.jsonl")), &certs)?;
        println!("{name:<22} {:>5} certs", certs.len());
        files += 1;
    }
    Ok(files)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let files = generate_into(dir.path(), 3, 1)?;
    println!("{files} batches in {}", dir.path().display());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Some(out) = args.next() else {
        return run_example();
    };
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    generate_into(Path::new(&out), count, seed)?;
    Ok(())
}
