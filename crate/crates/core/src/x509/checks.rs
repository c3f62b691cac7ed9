//! Value (stage 3) and crypto parameter (stage 4) checks.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::der::Oid;
use crate::taxonomy::{CategorizedError, ErrorCategory};

use super::cert::{
    AlgorithmIdentifier, Certificate, CurveRef, ExtensionValue, GeneralName, PublicKey, Time,
};
use super::check_id as id;
use super::{oids, uri, ValidationProfile};

type Check = Result<(), CategorizedError>;

fn fail(category: ErrorCategory, check: &str, message: impl Into<String>) -> Check {
    Err(CategorizedError::new(category, check, message))
}

/// Encoded versions 0, 1 and 2 are valid; extensions need version 2.
pub fn check_version(version: i64, has_extensions: bool, profile: &ValidationProfile) -> Check {
    if profile.check_version && !(0..=2).contains(&version) {
        return fail(ErrorCategory::X509ValueError, id::VERSION, format!("invalid version {version}"));
    }
    if profile.reject_v1 && version == 0 {
        return fail(ErrorCategory::X509ValueError, id::VERSION, "version 1 certificates are not accepted");
    }
    if profile.check_extensions_require_v3 && has_extensions && version != 2 {
        return fail(
            ErrorCategory::X509ValueError,
            id::EXTENSIONS_V3,
            format!("extensions present in a certificate with version {version}"),
        );
    }
    Ok(())
}

pub fn check_sig_alg_supported(alg: &AlgorithmIdentifier, supported: &BTreeSet<Oid>) -> Check {
    if supported.contains(&alg.oid) {
        Ok(())
    } else {
        fail(
            ErrorCategory::X509Unsupported,
            id::SIG_ALG_SUPPORTED,
            format!("unsupported signature algorithm {}", alg.oid),
        )
    }
}

fn is_null_or_absent(alg: &AlgorithmIdentifier) -> bool {
    alg.parameters.as_ref().is_none_or(|p| p.is_null())
}

/// Inner and outer algorithm identifiers must agree. With `exact` they are
/// compared as encoded bytes.
pub fn check_sig_alg_match(
    tbs: &AlgorithmIdentifier,
    outer: &AlgorithmIdentifier,
    exact: bool,
) -> Check {
    let same = if exact {
        tbs.raw == outer.raw
    } else {
        tbs.oid == outer.oid
            && (tbs.parameters == outer.parameters
                || (tbs.oid.arcs().starts_with(oids::PKCS1)
                    && is_null_or_absent(tbs)
                    && is_null_or_absent(outer)))
    };
    if same {
        Ok(())
    } else {
        fail(
            ErrorCategory::X509ValueError,
            id::SIG_ALG_MATCH,
            format!("signature algorithms do not match ({} vs {})", tbs.oid, outer.oid),
        )
    }
}

/// notBefore must not be later than notAfter. Bounds without a known
/// instant are not compared.
pub fn check_validity(not_before: &Time, not_after: &Time) -> Check {
    match (not_before.instant, not_after.instant) {
        (Some(a), Some(b)) if a > b => fail(
            ErrorCategory::X509ValueError,
            id::VALIDITY,
            format!("notBefore {} is after notAfter {}", not_before.text, not_after.text),
        ),
        _ => Ok(()),
    }
}

/// Duplicate OIDs, undecodable known values and unknown critical extensions.
pub fn check_extensions(cert: &Certificate, profile: &ValidationProfile) -> Check {
    let exts = cert.extensions();
    if profile.check_extension_values {
        if let Some((i, e)) = exts.iter().enumerate().find(|(_, e)| e.decode_error.is_some()) {
            return fail(
                ErrorCategory::X509ParseError,
                id::EXT_VALUE,
                format!(
                    "extension {i} ({}): {}",
                    e.oid,
                    e.decode_error.as_deref().unwrap_or_default()
                ),
            );
        }
    }
    if profile.check_duplicate_extensions {
        let mut seen = BTreeSet::new();
        for e in exts {
            if !seen.insert(&e.oid) {
                return fail(
                    ErrorCategory::X509ValueError,
                    id::EXT_DUPLICATE,
                    format!("duplicate extension {}", e.oid),
                );
            }
        }
    }
    if profile.reject_unknown_critical_extension {
        if let Some(e) = exts.iter().find(|e| e.critical && !e.is_known()) {
            return fail(
                ErrorCategory::X509Unsupported,
                id::EXT_UNKNOWN_CRITICAL,
                format!("unsupported critical extension {}", e.oid),
            );
        }
    }
    Ok(())
}

fn is_local_domain(host: &str) -> bool {
    let host = host.strip_suffix('.').unwrap_or(host).to_ascii_lowercase();
    host == "local" || host.ends_with(".local")
}

/// Checks a list of alternative names. `offset` numbers the first entry.
pub fn check_general_names(
    names: &[GeneralName],
    offset: usize,
    profile: &ValidationProfile,
) -> Check {
    for (i, name) in names.iter().enumerate() {
        let index = offset + i;
        match name {
            GeneralName::Uri(u) => {
                if profile.check_uri_syntax && !uri::is_valid_uri(u) {
                    return fail(
                        ErrorCategory::X509ParseError,
                        id::SAN_URI,
                        format!("cannot parse URI {u:?} (entry {index})"),
                    );
                }
                if profile.reject_local_domains && uri::uri_host(u).is_some_and(is_local_domain) {
                    return fail(
                        ErrorCategory::X509ParseError,
                        id::SAN_LOCAL_DOMAIN,
                        format!("URI {u:?} uses a .local domain (entry {index})"),
                    );
                }
            }
            GeneralName::Dns(d) if profile.reject_local_domains && is_local_domain(d) => {
                return fail(
                    ErrorCategory::X509ParseError,
                    id::SAN_LOCAL_DOMAIN,
                    format!("DNS name {d:?} is a .local domain (entry {index})"),
                );
            }
            GeneralName::IpAddress(ip)
                if profile.check_ip_length && ip.len() != 4 && ip.len() != 16 =>
            {
                return fail(
                    ErrorCategory::X509ParseError,
                    id::SAN_IP,
                    format!("cannot parse IP address of length {} (entry {index})", ip.len()),
                );
            }
            _ => {}
        }
    }
    Ok(())
}

/// URI, IP and domain checks over subjectAltName then issuerAltName.
pub fn check_names_and_uris(cert: &Certificate, profile: &ValidationProfile) -> Check {
    let mut offset = 0;
    for e in cert.extensions() {
        if let Some(ExtensionValue::SubjectAltName(names) | ExtensionValue::IssuerAltName(names)) =
            &e.decoded
        {
            check_general_names(names, offset, profile)?;
            offset += names.len();
        }
    }
    Ok(())
}

pub fn check_rsa_key(n: &BigInt, e: &BigInt, profile: &ValidationProfile) -> Check {
    let problem = if !n.is_positive() {
        "modulus is not positive".to_string()
    } else if n.is_even() {
        "modulus is even".to_string()
    } else if !e.is_positive() {
        "public exponent is not positive".to_string()
    } else if e.is_even() {
        "public exponent is even".to_string()
    } else if *e < BigInt::from(profile.min_rsa_exponent) {
        format!("public exponent {e} is below {}", profile.min_rsa_exponent)
    } else {
        return Ok(());
    };
    let field = if problem.starts_with("modulus") { "modulus" } else { "public exponent" };
    fail(
        ErrorCategory::CryptoValueError,
        id::RSA_KEY,
        format!("invalid RSA {field}: {problem}"),
    )
}

pub fn check_ec_key(curve: &CurveRef, point: &[u8], profile: &ValidationProfile) -> Check {
    let unsupported = |what: String| fail(ErrorCategory::CryptoUnsupported, id::EC_CURVE, what);
    let params = match curve {
        CurveRef::Named(c) if profile.supported_curves.contains(c) => c.params(),
        CurveRef::Named(c) => return unsupported(format!("unsupported elliptic curve {c}")),
        CurveRef::Unknown(oid) => return unsupported(format!("unsupported elliptic curve {oid}")),
        CurveRef::Explicit => return unsupported("explicit curve parameters are not supported".into()),
        CurveRef::Missing => return unsupported("missing named curve".into()),
    };
    match params.check_point(point) {
        Ok(_) => Ok(()),
        Err(e) => fail(ErrorCategory::CryptoValueError, id::EC_POINT, format!("invalid ECDSA parameter: {e}")),
    }
}

/// Stage 3. The first failing check wins.
pub(crate) fn value_checks(cert: &Certificate, profile: &ValidationProfile) -> Check {
    check_version(cert.version, cert.has_extensions(), profile)?;
    if profile.check_sig_alg_supported {
        check_sig_alg_supported(&cert.tbs_sig_alg, &profile.supported_sig_algs)?;
        check_sig_alg_supported(&cert.outer_sig_alg, &profile.supported_sig_algs)?;
    }
    if profile.check_sig_alg_match {
        check_sig_alg_match(&cert.tbs_sig_alg, &cert.outer_sig_alg, profile.sig_alg_params_exact)?;
    }
    if profile.check_validity_order {
        check_validity(&cert.not_before, &cert.not_after)?;
    }
    check_extensions(cert, profile)?;
    check_names_and_uris(cert, profile)
}

/// Stage 4.
pub(crate) fn crypto_checks(cert: &Certificate, profile: &ValidationProfile) -> Check {
    match &cert.spki.key {
        PublicKey::Rsa { modulus, exponent } if profile.check_rsa_params => {
            check_rsa_key(modulus, exponent, profile)
        }
        PublicKey::Ec { curve, point } if profile.check_ec_params => {
            check_ec_key(curve, point, profile)
        }
        PublicKey::Malformed { algorithm, reason } => {
            let check = if algorithm.is(oids::EC_PUBLIC_KEY) {
                profile.check_ec_params.then_some(id::EC_POINT)
            } else {
                profile.check_rsa_params.then_some(id::RSA_KEY)
            };
            match check {
                Some(check) => fail(
                    ErrorCategory::CryptoValueError,
                    check,
                    format!("malformed public key: {reason}"),
                ),
                None => Ok(()),
            }
        }
        _ => Ok(()),
    }
}
