//! Deterministic synthetic certificates: a valid baseline and one mutant per
//! defect the reference parser checks for.
//!
//! Every certificate is derived from `(seed, index)`. The baseline for a
//! given pair is fixed, and a mutant is that baseline with one defect
//! applied, so the two differ only in the defect's bytes. Signatures are
//! random bytes and are never meant to verify.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use chrono::{Duration, TimeZone, Utc};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::der::{encode, Asn1Value, Content, Oid, Tag};
use crate::taxonomy::ErrorCategory;
use crate::x509::{check_id, curves, oids};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectId {
    None,
    InvalidVersion,
    RsaBadExponent,
    RsaEvenModulus,
    EcBadPoint,
    EcUnknownCurve,
    BadUtctime,
    BadUri,
    BadIpLength,
    DuplicateExtension,
    SigAlgMismatch,
    ValidityReversed,
    UnknownCriticalExt,
    Truncated,
    NonMinimalLength,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown defect `{0}`")]
pub struct UnknownDefect(pub String);

impl DefectId {
    pub const ALL: [DefectId; 15] = [
        DefectId::None,
        DefectId::InvalidVersion,
        DefectId::RsaBadExponent,
        DefectId::RsaEvenModulus,
        DefectId::EcBadPoint,
        DefectId::EcUnknownCurve,
        DefectId::BadUtctime,
        DefectId::BadUri,
        DefectId::BadIpLength,
        DefectId::DuplicateExtension,
        DefectId::SigAlgMismatch,
        DefectId::ValidityReversed,
        DefectId::UnknownCriticalExt,
        DefectId::Truncated,
        DefectId::NonMinimalLength,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DefectId::None => "none",
            DefectId::InvalidVersion => "invalid-version",
            DefectId::RsaBadExponent => "rsa-bad-exponent",
            DefectId::RsaEvenModulus => "rsa-even-modulus",
            DefectId::EcBadPoint => "ec-bad-point",
            DefectId::EcUnknownCurve => "ec-unknown-curve",
            DefectId::BadUtctime => "bad-utctime",
            DefectId::BadUri => "bad-uri",
            DefectId::BadIpLength => "bad-ip-length",
            DefectId::DuplicateExtension => "duplicate-extension",
            DefectId::SigAlgMismatch => "sig-alg-mismatch",
            DefectId::ValidityReversed => "validity-reversed",
            DefectId::UnknownCriticalExt => "unknown-critical-ext",
            DefectId::Truncated => "truncated",
            DefectId::NonMinimalLength => "non-minimal-length",
        }
    }

    /// Key type of the baseline this defect is applied to.
    pub fn key_kind(&self) -> KeyKind {
        match self {
            DefectId::EcBadPoint | DefectId::EcUnknownCurve => KeyKind::Ec,
            _ => KeyKind::Rsa,
        }
    }

    pub fn ground_truth(&self) -> GroundTruth {
        use ErrorCategory::*;
        use Expected::{Accept, Reject};
        let (lenient, strict) = match self {
            DefectId::None => (Accept, Accept),
            DefectId::InvalidVersion
            | DefectId::DuplicateExtension
            | DefectId::SigAlgMismatch
            | DefectId::ValidityReversed => (Accept, Reject(X509ValueError)),
            DefectId::RsaBadExponent | DefectId::RsaEvenModulus | DefectId::EcBadPoint => {
                (Accept, Reject(CryptoValueError))
            }
            DefectId::EcUnknownCurve => (Accept, Reject(CryptoUnsupported)),
            DefectId::BadUtctime => (Accept, Reject(Asn1ParseError)),
            DefectId::BadUri | DefectId::BadIpLength => (Accept, Reject(X509ParseError)),
            DefectId::UnknownCriticalExt => (Accept, Reject(X509Unsupported)),
            DefectId::Truncated | DefectId::NonMinimalLength => {
                (Reject(Asn1ParseError), Reject(Asn1ParseError))
            }
        };
        GroundTruth { lenient, strict }
    }

    /// The check that rejects this defect under the strict profile.
    pub fn strict_check_id(&self) -> Option<&'static str> {
        Some(match self {
            DefectId::None => return None,
            DefectId::InvalidVersion => check_id::VERSION,
            DefectId::RsaBadExponent | DefectId::RsaEvenModulus => check_id::RSA_KEY,
            DefectId::EcBadPoint => check_id::EC_POINT,
            DefectId::EcUnknownCurve => check_id::EC_CURVE,
            DefectId::BadUtctime | DefectId::Truncated | DefectId::NonMinimalLength => check_id::DER,
            DefectId::BadUri => check_id::SAN_URI,
            DefectId::BadIpLength => check_id::SAN_IP,
            DefectId::DuplicateExtension => check_id::EXT_DUPLICATE,
            DefectId::SigAlgMismatch => check_id::SIG_ALG_MATCH,
            DefectId::ValidityReversed => check_id::VALIDITY,
            DefectId::UnknownCriticalExt => check_id::EXT_UNKNOWN_CRITICAL,
        })
    }
}

impl fmt::Display for DefectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for DefectId {
    type Err = UnknownDefect;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DefectId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| UnknownDefect(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyKind {
    Rsa,
    Ec,
}

/// Expected parser verdict: accept, or reject with a category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Expected {
    Accept,
    Reject(ErrorCategory),
}

impl Expected {
    pub fn category(&self) -> Option<ErrorCategory> {
        match self {
            Expected::Accept => None,
            Expected::Reject(c) => Some(*c),
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Accept => f.pad("accept"),
            Expected::Reject(c) => f.pad(c.as_str()),
        }
    }
}

impl From<Expected> for String {
    fn from(e: Expected) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Expected {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "accept" {
            Ok(Expected::Accept)
        } else {
            s.parse().map(Expected::Reject).map_err(|e| format!("{e}"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lenient: Expected,
    pub strict: Expected,
}

impl GroundTruth {
    /// Verdict for a built-in profile name.
    pub fn for_profile(&self, name: &str) -> Option<Expected> {
        match name {
            "lenient" => Some(self.lenient),
            "strict" => Some(self.strict),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DefectSpec {
    pub defect: DefectId,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("count must be positive")]
    ZeroCount,
    #[error(transparent)]
    UnknownDefect(#[from] UnknownDefect),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Named specs with fixed counts: `(name, defect, count)`.
pub const PRESETS: [(&str, DefectId, usize); 3] = [
    ("invalid-version-160", DefectId::InvalidVersion, 160),
    ("rsa-bad-exponent-264", DefectId::RsaBadExponent, 264),
    ("ec-bad-point-17", DefectId::EcBadPoint, 17),
];

impl DefectSpec {
    pub fn new(defect: DefectId, count: usize, seed: u64) -> Result<Self, SpecError> {
        if count == 0 {
            return Err(SpecError::ZeroCount);
        }
        Ok(DefectSpec { defect, count, seed })
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self, SpecError> {
        PRESETS
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, defect, count)| DefectSpec {
                defect: *defect,
                count: *count,
                seed,
            })
            .ok_or_else(|| SpecError::UnknownPreset(name.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedCert {
    pub der: Vec<u8>,
    pub defect: DefectId,
    pub index: usize,
    pub ground_truth: GroundTruth,
}

impl GeneratedCert {
    pub fn fingerprint(&self) -> String {
        crate::fingerprint(&self.der)
    }

    pub fn record(&self) -> GroundTruthRecord {
        GroundTruthRecord {
            fingerprint: self.fingerprint(),
            defect_id: self.defect,
            index: self.index,
            lenient: self.ground_truth.lenient,
            strict: self.ground_truth.strict,
        }
    }
}

/// One line of the ground-truth sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub fingerprint: String,
    pub defect_id: DefectId,
    pub index: usize,
    pub lenient: Expected,
    pub strict: Expected,
}

fn rng_for(seed: u64, index: usize, stream: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"parseval-certgen");
    h.update(seed.to_be_bytes());
    h.update((index as u64).to_be_bytes());
    h.update(stream.as_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

fn random_bytes(rng: &mut impl RngCore, n: usize) -> Vec<u8> {
    let mut v = vec![0; n];
    rng.fill_bytes(&mut v);
    v
}

/// Product of the odd primes below 752.
static SMALL_PRIMORIAL: LazyLock<BigInt> = LazyLock::new(|| {
    (3u32..752)
        .filter(|n| (2..*n).take_while(|d| d * d <= *n).all(|d| n % d != 0))
        .map(BigInt::from)
        .product()
});

/// A 2048-bit odd modulus with no prime factor below 752, so that key
/// sanity checks in other parsers accept it.
fn rsa_modulus(rng: &mut impl RngCore) -> BigInt {
    loop {
        let mut bytes = random_bytes(rng, 256);
        bytes[0] |= 0x80;
        bytes[255] |= 1;
        let n = BigInt::from_bytes_be(Sign::Plus, &bytes);
        if n.gcd(&SMALL_PRIMORIAL).is_one() {
            return n;
        }
    }
}

#[derive(Clone, Debug)]
enum KeyMaterial {
    Rsa { n: BigInt, e: BigInt },
    Ec { curve: Oid, point: Vec<u8> },
}

#[derive(Clone, Debug)]
struct Ext {
    oid: Oid,
    critical: bool,
    value: Asn1Value,
}

impl Ext {
    fn new(arcs: &[u64], critical: bool, value: Asn1Value) -> Self {
        Ext {
            oid: Oid::from_static(arcs),
            critical,
            value,
        }
    }

    fn to_value(&self) -> Asn1Value {
        let mut fields = vec![Asn1Value::oid(&self.oid)];
        if self.critical {
            fields.push(Asn1Value::boolean(true));
        }
        fields.push(Asn1Value::octet_string(der_of(&self.value)));
        Asn1Value::sequence(fields)
    }
}

fn der_of(v: &Asn1Value) -> Vec<u8> {
    // builders only produce encodable trees
    encode(v).expect("generated value is encodable")
}

/// Certificate fields before encoding; mutations edit this.
#[derive(Clone, Debug)]
struct Template {
    version: Option<Asn1Value>,
    serial: Vec<u8>,
    tbs_alg: Asn1Value,
    issuer: Asn1Value,
    not_before: Asn1Value,
    not_after: Asn1Value,
    subject: Asn1Value,
    key: KeyMaterial,
    extensions: Option<Vec<Ext>>,
    outer_alg: Asn1Value,
    signature: Vec<u8>,
}

fn alg_id(arcs: &[u64], null_params: bool) -> Asn1Value {
    let mut fields = vec![Asn1Value::oid(&Oid::from_static(arcs))];
    if null_params {
        fields.push(Asn1Value::null());
    }
    Asn1Value::sequence(fields)
}

fn name(host: &str) -> Asn1Value {
    let rdn = |arcs: &[u64], value: Asn1Value| {
        Asn1Value::set(vec![Asn1Value::sequence(vec![
            Asn1Value::oid(&Oid::from_static(arcs)),
            value,
        ])])
    };
    Asn1Value::sequence(vec![
        rdn(oids::COUNTRY, Asn1Value::printable_string("US")),
        rdn(oids::ORGANIZATION, Asn1Value::utf8_string("Parseval Test")),
        rdn(oids::COMMON_NAME, Asn1Value::utf8_string(host)),
    ])
}

fn san(host: &str, ip: [u8; 4]) -> Asn1Value {
    Asn1Value::sequence(vec![
        Asn1Value::implicit(2, host.as_bytes().to_vec()),
        Asn1Value::implicit(6, format!("https://{host}/").into_bytes()),
        Asn1Value::implicit(7, ip.to_vec()),
    ])
}

const SAN_URI_INDEX: usize = 1;
const SAN_IP_INDEX: usize = 2;

impl Template {
    fn baseline(seed: u64, index: usize, kind: KeyKind) -> Self {
        let mut rng = rng_for(seed, index, "baseline");
        let host = format!("host-{index}.example.com");

        let mut serial = vec![0x40];
        serial.extend_from_slice(&(index as u32).to_be_bytes());
        serial.extend(random_bytes(&mut rng, 11));

        let start = Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap()
            + Duration::days(rng.gen_range(0..365))
            + Duration::seconds(rng.gen_range(0..86_400));
        let end = start + Duration::days(365);

        let (key, sig_arcs, sig_null, sig_len, key_usage) = match kind {
            KeyKind::Rsa => {
                let key = KeyMaterial::Rsa {
                    n: rsa_modulus(&mut rng),
                    e: BigInt::from(65537),
                };
                // digitalSignature, keyEncipherment
                (key, oids::SHA256_WITH_RSA, true, 256, vec![5, 0xa0])
            }
            KeyKind::Ec => {
                let c = &*curves::P256;
                let (x, y) = loop {
                    let x = BigUint::from_bytes_be(&random_bytes(&mut rng, 32)) % &c.p;
                    if let Some(y) = c.lift_x(&x) {
                        break (x, y);
                    }
                };
                let key = KeyMaterial::Ec {
                    curve: Oid::from_static(oids::SECP256R1),
                    point: c.encode_point(&x, &y),
                };
                // digitalSignature
                (key, oids::ECDSA_WITH_SHA256, false, 72, vec![7, 0x80])
            }
        };

        let ip = [192, 0, 2, rng.gen_range(1..255)];
        let extensions = vec![
            Ext::new(oids::BASIC_CONSTRAINTS, true, Asn1Value::sequence(vec![])),
            Ext::new(
                oids::KEY_USAGE,
                true,
                Asn1Value::new(Tag::BIT_STRING, Content::Primitive(key_usage)),
            ),
            Ext::new(
                oids::SUBJECT_KEY_IDENTIFIER,
                false,
                Asn1Value::octet_string(random_bytes(&mut rng, 20)),
            ),
            Ext::new(oids::SUBJECT_ALT_NAME, false, san(&host, ip)),
        ];

        Template {
            version: Some(Asn1Value::integer(2)),
            serial,
            tbs_alg: alg_id(sig_arcs, sig_null),
            issuer: name(&host),
            not_before: Asn1Value::time(&start),
            not_after: Asn1Value::time(&end),
            subject: name(&host),
            key,
            extensions: Some(extensions),
            outer_alg: alg_id(sig_arcs, sig_null),
            signature: random_bytes(&mut rng, sig_len),
        }
    }

    fn spki(&self) -> Asn1Value {
        match &self.key {
            KeyMaterial::Rsa { n, e } => Asn1Value::sequence(vec![
                alg_id(oids::RSA_ENCRYPTION, true),
                Asn1Value::bit_string(&der_of(&Asn1Value::sequence(vec![
                    Asn1Value::integer(n.clone()),
                    Asn1Value::integer(e.clone()),
                ]))),
            ]),
            KeyMaterial::Ec { curve, point } => Asn1Value::sequence(vec![
                Asn1Value::sequence(vec![
                    Asn1Value::oid(&Oid::from_static(oids::EC_PUBLIC_KEY)),
                    Asn1Value::oid(curve),
                ]),
                Asn1Value::bit_string(point),
            ]),
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut tbs = Vec::new();
        if let Some(v) = &self.version {
            tbs.push(Asn1Value::explicit(0, v.clone()));
        }
        tbs.extend([
            Asn1Value::integer_raw(self.serial.clone()),
            self.tbs_alg.clone(),
            self.issuer.clone(),
            Asn1Value::sequence(vec![self.not_before.clone(), self.not_after.clone()]),
            self.subject.clone(),
            self.spki(),
        ]);
        if let Some(exts) = &self.extensions {
            tbs.push(Asn1Value::explicit(
                3,
                Asn1Value::sequence(exts.iter().map(Ext::to_value).collect()),
            ));
        }
        der_of(&Asn1Value::sequence(vec![
            Asn1Value::sequence(tbs),
            self.outer_alg.clone(),
            Asn1Value::bit_string(&self.signature),
        ]))
    }

    fn ext_mut(&mut self, arcs: &[u64]) -> &mut Ext {
        self.extensions
            .as_mut()
            .and_then(|exts| exts.iter_mut().find(|e| e.oid.is(arcs)))
            .expect("baseline carries the extension")
    }

    fn set_san_entry(&mut self, index: usize, entry: Asn1Value) {
        let san = self.ext_mut(oids::SUBJECT_ALT_NAME);
        if let Content::Constructed(entries) = &mut san.value.content {
            entries[index] = entry;
        }
    }
}

/// The valid certificate for `(seed, index)` with the given key type.
pub fn baseline(seed: u64, index: usize, kind: KeyKind) -> Vec<u8> {
    Template::baseline(seed, index, kind).encode()
}

/// The baseline as a version 1 certificate: no version field, no
/// extensions.
pub fn baseline_v1(seed: u64, index: usize) -> Vec<u8> {
    let mut t = Template::baseline(seed, index, KeyKind::Rsa);
    t.version = None;
    t.extensions = None;
    t.encode()
}

/// Certificate `index` of a corpus with the given defect.
pub fn generate_one(defect: DefectId, seed: u64, index: usize) -> GeneratedCert {
    let mut t = Template::baseline(seed, index, defect.key_kind());
    let mut rng = rng_for(seed, index, defect.as_str());
    let host = format!("host-{index}.example.com");

    match defect {
        DefectId::None | DefectId::Truncated | DefectId::NonMinimalLength => {}
        DefectId::InvalidVersion => {
            let v = *[3i64, 4, 5, 6, 7, 9, 10, 127, 255].choose(&mut rng).unwrap_or(&5);
            t.version = Some(Asn1Value::integer(v));
        }
        DefectId::RsaBadExponent => {
            if let KeyMaterial::Rsa { e, .. } = &mut t.key {
                *e = BigInt::from(*[1i64, 1, 1, 2, 4, 65536].choose(&mut rng).unwrap_or(&1));
            }
        }
        DefectId::RsaEvenModulus => {
            if let KeyMaterial::Rsa { n, .. } = &mut t.key {
                *n -= 1;
            }
        }
        DefectId::EcBadPoint => {
            if let KeyMaterial::Ec { point, .. } = &mut t.key {
                let c = &*curves::P256;
                let len = c.coordinate_len();
                let x = BigUint::from_bytes_be(&point[1..1 + len]);
                let mut y = BigUint::from_bytes_be(&point[1 + len..]);
                loop {
                    y = (y + 1u8) % &c.p;
                    if !c.contains(&x, &y) {
                        break;
                    }
                }
                *point = c.encode_point(&x, &y);
            }
        }
        DefectId::EcUnknownCurve => {
            const BRAINPOOL_P256R1: &[u64] = &[1, 3, 36, 3, 3, 2, 8, 1, 1, 7];
            if let KeyMaterial::Ec { curve, .. } = &mut t.key {
                let arcs = [oids::SECP256K1, BRAINPOOL_P256R1][rng.gen_range(0..2)];
                *curve = Oid::from_static(arcs);
            }
        }
        DefectId::BadUtctime => {
            let text = String::from_utf8_lossy(t.not_before.primitive().unwrap_or_default())
                .into_owned();
            let broken = if rng.gen_bool(0.5) {
                format!("{}Z", &text[..10])
            } else {
                format!("{}+0000", &text[..12])
            };
            t.not_before = Asn1Value::new(Tag::UTC_TIME, Content::Primitive(broken.into_bytes()));
        }
        DefectId::BadUri => {
            let uris = [
                "http://[::1".to_string(),
                format!("https://{host}:80a/"),
                format!("https://exa mple.{host}/"),
                format!("https://{host}/%zz"),
                format!("//{host}/missing-scheme"),
            ];
            let uri = uris.choose(&mut rng).cloned().unwrap_or_default();
            t.set_san_entry(SAN_URI_INDEX, Asn1Value::implicit(6, uri.into_bytes()));
        }
        DefectId::BadIpLength => {
            let len = *[0usize, 3, 5, 8, 17].choose(&mut rng).unwrap_or(&5);
            t.set_san_entry(SAN_IP_INDEX, Asn1Value::implicit(7, random_bytes(&mut rng, len)));
        }
        DefectId::DuplicateExtension => {
            if let Some(exts) = &mut t.extensions {
                let copy = exts[rng.gen_range(0..exts.len())].clone();
                exts.push(copy);
            }
        }
        DefectId::SigAlgMismatch => {
            let arcs = [oids::SHA384_WITH_RSA, oids::SHA512_WITH_RSA][rng.gen_range(0..2)];
            t.outer_alg = alg_id(arcs, true);
        }
        DefectId::ValidityReversed => {
            std::mem::swap(&mut t.not_before, &mut t.not_after);
        }
        DefectId::UnknownCriticalExt => {
            let arcs = [1, 3, 6, 1, 4, 1, 55738, 1, rng.gen_range(1..1000)];
            if let Some(exts) = &mut t.extensions {
                exts.push(Ext::new(&arcs, true, Asn1Value::null()));
            }
        }
    }

    let mut der = t.encode();
    match defect {
        DefectId::Truncated => {
            let cut = rng.gen_range(1..=16.min(der.len() - 1));
            der.truncate(der.len() - cut);
        }
        DefectId::NonMinimalLength => {
            // 30 82 hi lo  ->  30 83 00 hi lo
            debug_assert_eq!(der[1], 0x82);
            der[1] = 0x83;
            der.insert(2, 0);
        }
        _ => {}
    }

    GeneratedCert {
        der,
        defect,
        index,
        ground_truth: defect.ground_truth(),
    }
}

pub fn generate(spec: &DefectSpec) -> Vec<GeneratedCert> {
    (0..spec.count)
        .map(|i| generate_one(spec.defect, spec.seed, i))
        .collect()
}

/// Concatenation of several specs, in order.
pub fn generate_corpus(specs: &[DefectSpec]) -> Vec<GeneratedCert> {
    specs.iter().flat_map(generate).collect()
}

/// Writes a batch file: one base64 DER per line.
pub fn write_batch(path: impl AsRef<Path>, certs: &[GeneratedCert]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in certs {
        writeln!(out, "{}", STANDARD.encode(&c.der))?;
    }
    out.flush()
}

/// Writes the JSON-lines ground-truth sidecar.
pub fn write_sidecar(path: impl AsRef<Path>, certs: &[GeneratedCert]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in certs {
        serde_json::to_writer(&mut out, &c.record())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_sidecar(path: impl AsRef<Path>) -> io::Result<Vec<GroundTruthRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::x509::{parse_certificate, ValidationProfile};

    #[test]
    fn defect_names_round_trip() {
        for d in DefectId::ALL {
            assert_eq!(d.as_str().parse::<DefectId>(), Ok(d));
            assert_eq!(serde_json::to_string(&d).unwrap(), format!("\"{d}\""));
        }
        assert!("bogus".parse::<DefectId>().is_err());
    }

    #[test]
    fn expected_serde() {
        let e = Expected::Reject(ErrorCategory::CryptoValueError);
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"CRYPTO_VALUE_ERROR\"");
        assert_eq!(serde_json::from_str::<Expected>("\"accept\"").unwrap(), Expected::Accept);
        assert!(serde_json::from_str::<Expected>("\"nope\"").is_err());
    }

    #[test]
    fn baselines_parse_strictly() {
        for kind in [KeyKind::Rsa, KeyKind::Ec] {
            let der = baseline(7, 3, kind);
            let cert = parse_certificate(&der, &ValidationProfile::strict()).unwrap();
            assert_eq!(cert.version, 2);
            assert_eq!(cert.extensions().len(), 4);
            assert_eq!(cert.subject_alt_names().map(<[_]>::len), Some(3));
        }
        let v1 = parse_certificate(&baseline_v1(7, 3), &ValidationProfile::strict()).unwrap();
        assert_eq!(v1.version, 0);
        assert!(!v1.has_extensions());
    }

    #[test]
    fn every_defect_matches_ground_truth() {
        for d in DefectId::ALL {
            for i in 0..8 {
                let c = generate_one(d, 11, i);
                for (name, expected) in [("strict", c.ground_truth.strict), ("lenient", c.ground_truth.lenient)] {
                    let profile = ValidationProfile::by_name(name).unwrap();
                    let got = parse_certificate(&c.der, &profile).err();
                    assert_eq!(got.as_ref().map(|e| e.category), expected.category(), "{d} #{i} {name}: {got:?}");
                    if name == "strict" {
                        assert_eq!(got.and_then(|e| e.check_id).as_deref(), d.strict_check_id(), "{d} #{i}");
                    }
                }
            }
        }
    }

    #[test]
    fn presets_and_spec_errors() {
        let s = DefectSpec::preset("rsa-bad-exponent-264", 1).unwrap();
        assert_eq!((s.defect, s.count), (DefectId::RsaBadExponent, 264));
        assert!(DefectSpec::preset("x", 1).is_err());
        assert_eq!(DefectSpec::new(DefectId::None, 0, 1), Err(SpecError::ZeroCount));
    }
}
