//! Reference X.509 certificate parser.
//!
//! [`parse_certificate`] runs four stages in order and reports the first
//! failure: DER decoding, structural mapping, value checks and crypto
//! parameter checks. Which value and crypto checks run is controlled by a
//! [`ValidationProfile`]. Signatures and trust chains are never verified.

mod cert;
pub mod checks;
pub mod curves;
pub mod oids;
mod pem;
pub mod uri;

use std::collections::BTreeSet;
use std::fmt;

pub use cert::{
    AlgorithmIdentifier, Certificate, CurveRef, Extension, ExtensionValue, GeneralName, Name,
    NameAttribute, PublicKey, PublicKeyInfo, Time,
};
pub use curves::{CurveId, CurveParams, PointError};
pub use pem::{der_to_pem, pem_certificates, pem_to_der, PemError};

use crate::der::{decode_with, DecodeError, DecodeOptions, DerRules, Oid};
use crate::taxonomy::{CategorizedError, ErrorCategory};

/// Identifiers of the built-in checks, used as the prefix of error strings.
pub mod check_id {
    pub const DER: &str = "der";
    pub const STRUCTURE: &str = "structure";
    pub const EXT_VALUE: &str = "ext-value";
    pub const SAN_URI: &str = "san-uri";
    pub const SAN_IP: &str = "san-ip";
    pub const SAN_LOCAL_DOMAIN: &str = "san-local-domain";
    pub const VERSION: &str = "version";
    pub const EXTENSIONS_V3: &str = "extensions-v3";
    pub const SIG_ALG_SUPPORTED: &str = "sig-alg-supported";
    pub const SIG_ALG_MATCH: &str = "sig-alg-match";
    pub const VALIDITY: &str = "validity";
    pub const EXT_DUPLICATE: &str = "ext-duplicate";
    pub const EXT_UNKNOWN_CRITICAL: &str = "ext-unknown-critical";
    pub const RSA_KEY: &str = "rsa-key";
    pub const EC_CURVE: &str = "ec-curve";
    pub const EC_POINT: &str = "ec-point";
}

/// Which checks [`parse_certificate`] applies beyond DER and structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationProfile {
    pub check_version: bool,
    pub check_extensions_require_v3: bool,
    pub check_sig_alg_match: bool,
    pub check_rsa_params: bool,
    pub check_ec_params: bool,
    pub check_uri_syntax: bool,
    pub check_ip_length: bool,
    pub check_duplicate_extensions: bool,
    pub check_validity_order: bool,
    pub check_time_strict: bool,
    pub reject_unknown_critical_extension: bool,
    /// Reject signature algorithms outside `supported_sig_algs`.
    pub check_sig_alg_supported: bool,
    /// Reject recognized extensions whose value does not decode.
    pub check_extension_values: bool,
    /// Compare algorithm parameters byte for byte. When off, NULL and absent
    /// parameters are equal for PKCS #1 algorithms.
    pub sig_alg_params_exact: bool,
    /// Reject encoded version 0. Not part of [`ValidationProfile::strict`].
    pub reject_v1: bool,
    /// Reject `.local` DNS names and URI hosts. Not part of
    /// [`ValidationProfile::strict`].
    pub reject_local_domains: bool,
    pub supported_curves: BTreeSet<CurveId>,
    pub supported_sig_algs: BTreeSet<Oid>,
    pub min_rsa_exponent: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown profile flag `{0}`")]
pub struct UnknownFlag(pub String);

impl ValidationProfile {
    pub const FLAGS: [&'static str; 16] = [
        "check_version",
        "check_extensions_require_v3",
        "check_sig_alg_match",
        "check_rsa_params",
        "check_ec_params",
        "check_uri_syntax",
        "check_ip_length",
        "check_duplicate_extensions",
        "check_validity_order",
        "check_time_strict",
        "reject_unknown_critical_extension",
        "check_sig_alg_supported",
        "check_extension_values",
        "sig_alg_params_exact",
        "reject_v1",
        "reject_local_domains",
    ];

    fn with_all(on: bool) -> Self {
        ValidationProfile {
            check_version: on,
            check_extensions_require_v3: on,
            check_sig_alg_match: on,
            check_rsa_params: on,
            check_ec_params: on,
            check_uri_syntax: on,
            check_ip_length: on,
            check_duplicate_extensions: on,
            check_validity_order: on,
            check_time_strict: on,
            reject_unknown_critical_extension: on,
            check_sig_alg_supported: on,
            check_extension_values: on,
            sig_alg_params_exact: on,
            reject_v1: false,
            reject_local_domains: false,
            supported_curves: CurveId::ALL.into_iter().collect(),
            supported_sig_algs: oids::SUPPORTED_SIGNATURE_ALGORITHMS
                .iter()
                .map(|a| Oid::from_static(a))
                .collect(),
            min_rsa_exponent: 3,
        }
    }

    /// Every check off: DER and structure only.
    pub fn lenient() -> Self {
        Self::with_all(false)
    }

    /// Every check on, except the two optional rejections.
    pub fn strict() -> Self {
        Self::with_all(true)
    }

    /// `"strict"` or `"lenient"`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "strict" => Some(Self::strict()),
            "lenient" => Some(Self::lenient()),
            _ => None,
        }
    }

    fn flag_mut(&mut self, name: &str) -> Option<&mut bool> {
        Some(match name {
            "check_version" => &mut self.check_version,
            "check_extensions_require_v3" => &mut self.check_extensions_require_v3,
            "check_sig_alg_match" => &mut self.check_sig_alg_match,
            "check_rsa_params" => &mut self.check_rsa_params,
            "check_ec_params" => &mut self.check_ec_params,
            "check_uri_syntax" => &mut self.check_uri_syntax,
            "check_ip_length" => &mut self.check_ip_length,
            "check_duplicate_extensions" => &mut self.check_duplicate_extensions,
            "check_validity_order" => &mut self.check_validity_order,
            "check_time_strict" => &mut self.check_time_strict,
            "reject_unknown_critical_extension" => &mut self.reject_unknown_critical_extension,
            "check_sig_alg_supported" => &mut self.check_sig_alg_supported,
            "check_extension_values" => &mut self.check_extension_values,
            "sig_alg_params_exact" => &mut self.sig_alg_params_exact,
            "reject_v1" => &mut self.reject_v1,
            "reject_local_domains" => &mut self.reject_local_domains,
            _ => return None,
        })
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.clone().flag_mut(name).map(|f| *f)
    }

    pub fn set_flag(&mut self, name: &str, on: bool) -> Result<(), UnknownFlag> {
        let flag = self.flag_mut(name).ok_or_else(|| UnknownFlag(name.to_string()))?;
        *flag = on;
        Ok(())
    }

    pub fn with_flag(mut self, name: &str, on: bool) -> Result<Self, UnknownFlag> {
        self.set_flag(name, on)?;
        Ok(self)
    }

    pub fn flags(&self) -> Vec<(&'static str, bool)> {
        Self::FLAGS
            .iter()
            .map(|name| (*name, self.flag(name).unwrap_or(false)))
            .collect()
    }

    /// Whether `self` is no stricter than `other`: fewer flags, wider
    /// supported sets and a lower exponent bound.
    pub fn is_weaker_or_equal(&self, other: &ValidationProfile) -> bool {
        self.flags()
            .iter()
            .zip(other.flags())
            .all(|((_, a), (_, b))| !a || b)
            && self.supported_curves.is_superset(&other.supported_curves)
            && self.supported_sig_algs.is_superset(&other.supported_sig_algs)
            && self.min_rsa_exponent <= other.min_rsa_exponent
    }

    pub fn decode_options(&self) -> DecodeOptions {
        DecodeOptions {
            rules: DerRules {
                time_syntax: self.check_time_strict,
                ..DerRules::STRICT
            },
            ..DecodeOptions::default()
        }
    }
}

impl Default for ValidationProfile {
    fn default() -> Self {
        Self::strict()
    }
}

impl fmt::Display for ValidationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::strict() {
            f.write_str("strict")
        } else if *self == Self::lenient() {
            f.write_str("lenient")
        } else {
            f.write_str("custom")
        }
    }
}

fn der_error(e: DecodeError) -> CategorizedError {
    CategorizedError::new(ErrorCategory::Asn1ParseError, check_id::DER, e.to_string())
        .with_offset(e.offset)
}

/// Parses a DER certificate under `profile`.
pub fn parse_certificate(
    der: &[u8],
    profile: &ValidationProfile,
) -> Result<Certificate, CategorizedError> {
    let opts = profile.decode_options();
    let tree = decode_with(der, &opts).map_err(der_error)?;
    let cert = cert::map_certificate(&tree, der, &opts, profile.check_time_strict)?;
    checks::value_checks(&cert, profile)?;
    checks::crypto_checks(&cert, profile)?;
    Ok(cert)
}
