pub mod analytics;
pub mod certgen;
pub mod cli;
pub mod der;
pub mod harness;
pub mod taxonomy;
pub mod x509;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `der`, the identity of a certificate everywhere
/// in the crate.
pub fn fingerprint(der: &[u8]) -> String {
    hex::encode(Sha256::digest(der))
}
