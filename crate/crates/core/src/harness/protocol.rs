//! The adapter line protocol.
//!
//! ```text
//! adapter:  PARSEVAL-ADAPTER 1 <parser_id> <version>
//! harness:  <base64 DER>            one per line, then EOF
//! adapter:  OK<TAB><ns>             or
//!           ERR<TAB><ns><TAB><error string>
//! ```

use std::io::{self, BufRead, Write};
use std::time::Instant;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use crate::x509::{parse_certificate, ValidationProfile};

pub const MAGIC: &str = "PARSEVAL-ADAPTER";
pub const PROTOCOL_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Handshake {
    pub parser_id: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Response {
    Ok { duration_ns: u64 },
    Err { duration_ns: u64, error_string: String },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("malformed handshake {0:?}")]
    BadHandshake(String),
    #[error("unsupported protocol version {0:?}")]
    UnsupportedVersion(String),
    #[error("malformed response line {0:?}")]
    BadResponse(String),
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

pub fn handshake_line(parser_id: &str, version: &str) -> String {
    format!("{MAGIC} {PROTOCOL_VERSION} {parser_id} {version}")
}

pub fn parse_handshake(line: &str) -> Result<Handshake, ProtocolError> {
    let bad = || ProtocolError::BadHandshake(line.to_string());
    let parts: Vec<&str> = line.split(' ').collect();
    match parts.as_slice() {
        [MAGIC, v, id, version] if is_token(id) && is_token(version) => {
            if *v != PROTOCOL_VERSION {
                return Err(ProtocolError::UnsupportedVersion(v.to_string()));
            }
            Ok(Handshake {
                parser_id: id.to_string(),
                version: version.to_string(),
            })
        }
        _ => Err(bad()),
    }
}

/// Replaces tabs and line breaks with spaces.
pub fn sanitize(error_string: &str) -> String {
    error_string
        .chars()
        .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

pub fn format_response(r: &Response) -> String {
    match r {
        Response::Ok { duration_ns } => format!("OK\t{duration_ns}"),
        Response::Err {
            duration_ns,
            error_string,
        } => format!("ERR\t{duration_ns}\t{}", sanitize(error_string)),
    }
}

pub fn parse_response(line: &str) -> Result<Response, ProtocolError> {
    let bad = || ProtocolError::BadResponse(line.to_string());
    let mut parts = line.splitn(3, '\t');
    let status = parts.next().ok_or_else(bad)?;
    let duration_ns: u64 = parts.next().and_then(|d| d.parse().ok()).ok_or_else(bad)?;
    match (status, parts.next()) {
        ("OK", None) => Ok(Response::Ok { duration_ns }),
        ("ERR", Some(msg)) => Ok(Response::Err {
            duration_ns,
            error_string: msg.to_string(),
        }),
        _ => Err(bad()),
    }
}

/// Serves the protocol with the built-in parser: one response per input
/// line, in order, until EOF.
pub fn serve_adapter(
    parser_id: &str,
    profile: &ValidationProfile,
    input: impl BufRead,
    mut output: impl Write,
) -> io::Result<u64> {
    writeln!(output, "{}", handshake_line(parser_id, env!("CARGO_PKG_VERSION")))?;
    output.flush()?;
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        let response = match STANDARD.decode(line.trim()) {
            Ok(der) => {
                let start = Instant::now();
                let result = parse_certificate(&der, profile);
                let duration_ns = start.elapsed().as_nanos() as u64;
                match result {
                    Ok(_) => Response::Ok { duration_ns },
                    Err(e) => Response::Err {
                        duration_ns,
                        error_string: e.to_string(),
                    },
                }
            }
            Err(e) => Response::Err {
                duration_ns: 0,
                error_string: format!("adapter: invalid base64: {e}"),
            },
        };
        writeln!(output, "{}", format_response(&response))?;
        served += 1;
    }
    output.flush()?;
    Ok(served)
}
