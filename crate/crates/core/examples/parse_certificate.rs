// Parses one certificate under both built-in profiles.
//
// cargo run --example parse_certificate -- [cert.der|cert.pem]

use parseval::certgen::{self, DefectId};
use parseval::x509::{self, parse_certificate, ValidationProfile};

fn show(label: &str, der: &[u8]) {
    for profile in [ValidationProfile::strict(), ValidationProfile::lenient()] {
        match parse_certificate(der, &profile) {
            Ok(cert) => println!(
                "{label:<16} {profile:<8} accept  v{} subject={} san={:?}",
                cert.version + 1,
                cert.subject,
                cert.subject_alt_names()
            ),
            Err(e) => println!("{label:<16} {profile:<8} reject  [{}] {e}", e.category),
        }
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for defect in [DefectId::None, DefectId::InvalidVersion, DefectId::RsaBadExponent, DefectId::Truncated] {
        show(defect.as_str(), &certgen::generate_one(defect, 7, 0).der);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args().nth(1) {
        Some(path) => {
            let raw = std::fs::read(&path)?;
            let der = match std::str::from_utf8(&raw) {
                Ok(text) if text.contains("-----BEGIN") => x509::pem_to_der(text)?,
                _ => raw,
            };
            show(&path, &der);
            Ok(())
        }
        None => run_example(),
    }
}
