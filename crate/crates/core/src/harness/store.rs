use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ingest::IngestError;
use crate::taxonomy::ErrorCategory;

/// One persisted error outcome. Successes are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StoreRow {
    pub run_id: String,
    pub parser_id: String,
    pub fingerprint: String,
    pub batch_id: String,
    pub line_no: u64,
    pub error_string: String,
    pub category: ErrorCategory,
    pub duration_ns: u64,
}

pub fn write_rows<W: Write + ?Sized>(out: &mut W, rows: &[StoreRow]) -> io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut *out, row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_rows(reader: impl BufRead) -> io::Result<Vec<StoreRow>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("store line {}: {e}", i + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_store(path: impl AsRef<Path>) -> io::Result<Vec<StoreRow>> {
    read_rows(BufReader::new(File::open(path)?))
}

/// Sorted and deduplicated.
pub fn compact(mut rows: Vec<StoreRow>) -> Vec<StoreRow> {
    rows.sort();
    rows.dedup();
    rows
}

/// Rewrites a store file in compacted form.
pub fn compact_file(path: impl AsRef<Path>) -> io::Result<usize> {
    let path = path.as_ref();
    let rows = compact(read_store(path)?);
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        write_rows(&mut out, &rows)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(rows.len())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParserEntry {
    pub parser_id: String,
    pub version: String,
    /// `builtin:<profile>` or `exec:<command>`.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub batch_id: String,
    pub path: PathBuf,
    pub cert_count: u64,
    #[serde(default)]
    pub ingest_errors: Vec<IngestError>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchStatus {
    Ok,
    Failed,
}

/// One parser over one batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRun {
    pub parser_id: String,
    pub batch_id: String,
    pub cert_count: u64,
    pub wall_ns: u64,
    pub attempts: u32,
    pub status: BatchStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A fingerprint seen on more than one line of the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Duplicate {
    pub fingerprint: String,
    /// `(batch_id, line_no)` of every occurrence.
    pub occurrences: Vec<(String, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub timestamp: String,
    pub table_version: String,
    pub workers: usize,
    pub parsers: Vec<ParserEntry>,
    pub batches: Vec<BatchEntry>,
    pub batch_runs: Vec<BatchRun>,
    #[serde(default)]
    pub duplicates: Vec<Duplicate>,
}

impl RunManifest {
    /// Certificates in the corpus.
    pub fn total(&self) -> u64 {
        self.batches.iter().map(|b| b.cert_count).sum()
    }

    pub fn has_parser(&self, parser_id: &str) -> bool {
        self.parsers.iter().any(|p| p.parser_id == parser_id)
    }

    pub fn has_batch(&self, batch_id: &str) -> bool {
        self.batches.iter().any(|b| b.batch_id == batch_id)
    }

    /// Certificates a parser actually evaluated: the corpus minus batches
    /// that failed for it.
    pub fn evaluated(&self, parser_id: &str) -> u64 {
        self.batch_runs
            .iter()
            .filter(|r| r.parser_id == parser_id && r.status == BatchStatus::Ok)
            .map(|r| r.cert_count)
            .sum()
    }

    pub fn failures(&self) -> impl Iterator<Item = &BatchRun> {
        self.batch_runs.iter().filter(|r| r.status == BatchStatus::Failed)
    }

    pub fn failed_batches(&self, parser_id: &str) -> Vec<&str> {
        self.failures()
            .filter(|r| r.parser_id == parser_id)
            .map(|r| r.batch_id.as_str())
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        let file = BufReader::new(File::open(path)?);
        serde_json::from_reader(file).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// Groups row counts by `(parser_id, category)`.
pub fn count_by_parser(rows: &[StoreRow]) -> BTreeMap<&str, BTreeMap<ErrorCategory, u64>> {
    let mut out: BTreeMap<&str, BTreeMap<ErrorCategory, u64>> = BTreeMap::new();
    for row in rows {
        *out.entry(&row.parser_id).or_default().entry(row.category).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(parser: &str, line: u64) -> StoreRow {
        StoreRow {
            run_id: "r".into(),
            parser_id: parser.into(),
            fingerprint: format!("{line:064x}"),
            batch_id: "b".into(),
            line_no: line,
            error_string: "der: truncated at offset 0".into(),
            category: ErrorCategory::Asn1ParseError,
            duration_ns: 0,
        }
    }

    #[test]
    fn field_names_and_order() {
        let json = serde_json::to_string(&row("p", 1)).unwrap();
        let keys: Vec<&str> = json
            .trim_matches(['{', '}'])
            .split(',')
            .map(|kv| kv.split(':').next().unwrap().trim_matches('"'))
            .collect();
        assert_eq!(
            keys,
            ["run_id", "parser_id", "fingerprint", "batch_id", "line_no", "error_string", "category", "duration_ns"]
        );
        assert!(json.contains("\"category\":\"ASN1_PARSE_ERROR\""));
    }

    #[test]
    fn round_trip_and_compact() {
        let rows = vec![row("b", 2), row("a", 1), row("b", 2)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let c = compact(back);
        assert_eq!(c, vec![row("a", 1), row("b", 2)]);
        assert!(read_rows("{\"x\":1}\n".as_bytes()).is_err());
    }
}
