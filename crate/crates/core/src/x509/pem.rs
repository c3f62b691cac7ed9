use base64::engine::general_purpose::STANDARD;
use base64::Engine;

const BEGIN: &str = "-----BEGIN CERTIFICATE-----";
const END: &str = "-----END CERTIFICATE-----";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PemError {
    #[error("no CERTIFICATE block found")]
    NoBlock,
    #[error("CERTIFICATE block is not terminated")]
    Unterminated,
    #[error("invalid base64 in CERTIFICATE block: {0}")]
    Base64(String),
}

/// Every CERTIFICATE block in `text`, in order.
pub fn pem_certificates(text: &str) -> Result<Vec<Vec<u8>>, PemError> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(BEGIN) {
        let body_start = start + BEGIN.len();
        let len = rest[body_start..].find(END).ok_or(PemError::Unterminated)?;
        let body: String = rest[body_start..body_start + len]
            .chars()
            .filter(|c| !c.is_ascii_whitespace())
            .collect();
        out.push(STANDARD.decode(body).map_err(|e| PemError::Base64(e.to_string()))?);
        rest = &rest[body_start + len + END.len()..];
    }
    if out.is_empty() {
        return Err(PemError::NoBlock);
    }
    Ok(out)
}

/// The first CERTIFICATE block in `text`.
pub fn pem_to_der(text: &str) -> Result<Vec<u8>, PemError> {
    pem_certificates(text).map(|mut all| all.swap_remove(0))
}

pub fn der_to_pem(der: &[u8]) -> String {
    let body = STANDARD.encode(der);
    let mut out = String::with_capacity(body.len() + 64);
    out.push_str(BEGIN);
    out.push('\n');
    for chunk in body.as_bytes().chunks(64) {
        out.push_str(std::str::from_utf8(chunk).unwrap_or_default());
        out.push('\n');
    }
    out.push_str(END);
    out.push('\n');
    out
}
