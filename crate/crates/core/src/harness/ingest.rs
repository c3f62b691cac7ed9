use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

/// One certificate read from a batch file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertRecord {
    pub der: Vec<u8>,
    pub fingerprint: String,
    pub batch_id: String,
    /// 1-based physical line number.
    pub line_no: u64,
    /// The base64 text as read, forwarded verbatim to adapters.
    pub base64: String,
}

/// A line that did not decode as base64.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestError {
    pub batch_id: String,
    pub line_no: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub batch_id: String,
    pub path: PathBuf,
    pub records: Vec<CertRecord>,
    pub errors: Vec<IngestError>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Batch id of a file: its name without the extension.
pub fn batch_id_for(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "batch".to_string())
}

/// Parses batch text. Empty lines are skipped; undecodable lines become
/// [`IngestError`]s without affecting their neighbours.
pub fn ingest_str(batch_id: &str, text: &str) -> (Vec<CertRecord>, Vec<IngestError>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line_no = i as u64 + 1;
        match STANDARD.decode(line) {
            Ok(der) if !der.is_empty() => records.push(CertRecord {
                fingerprint: crate::fingerprint(&der),
                der,
                batch_id: batch_id.to_string(),
                line_no,
                base64: line.to_string(),
            }),
            Ok(_) => errors.push(IngestError {
                batch_id: batch_id.to_string(),
                line_no,
                message: "line decodes to zero bytes".into(),
            }),
            Err(e) => errors.push(IngestError {
                batch_id: batch_id.to_string(),
                line_no,
                message: format!("invalid base64: {e}"),
            }),
        }
    }
    (records, errors)
}

pub fn ingest(path: impl AsRef<Path>) -> io::Result<Batch> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let batch_id = batch_id_for(path);
    let (records, errors) = ingest_str(&batch_id, &text);
    Ok(Batch {
        batch_id,
        path: path.to_path_buf(),
        records,
        errors,
    })
}
