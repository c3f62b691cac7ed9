use std::fmt;

use chrono::{DateTime, Utc};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::der::{
    decode_with, parse_time, parse_time_lenient, Asn1Value, Class, DecodeOptions, Oid, Span, Tag,
};
use crate::taxonomy::{CategorizedError, ErrorCategory};

use super::curves::CurveId;
use super::oids;

/// Structured view of a certificate produced by [`super::parse_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Encoded version value: 0 is v1, 2 is v3. Values that do not fit an
    /// `i64` saturate.
    pub version: i64,
    pub serial: BigInt,
    pub tbs_sig_alg: AlgorithmIdentifier,
    pub outer_sig_alg: AlgorithmIdentifier,
    pub issuer: Name,
    pub subject: Name,
    pub not_before: Time,
    pub not_after: Time,
    pub spki: PublicKeyInfo,
    /// `None` when the `[3]` extensions field is absent.
    pub extensions: Option<Vec<Extension>>,
    pub signature: Vec<u8>,
    pub raw_tbs_span: Span,
    pub raw_der: Vec<u8>,
}

impl Certificate {
    pub fn fingerprint(&self) -> String {
        crate::fingerprint(&self.raw_der)
    }

    pub fn raw_tbs(&self) -> &[u8] {
        &self.raw_der[self.raw_tbs_span.range()]
    }

    pub fn extensions(&self) -> &[Extension] {
        self.extensions.as_deref().unwrap_or(&[])
    }

    pub fn has_extensions(&self) -> bool {
        self.extensions.is_some()
    }

    /// Decoded subjectAltName entries, if the extension is present and
    /// decodable.
    pub fn subject_alt_names(&self) -> Option<&[GeneralName]> {
        self.extensions().iter().find_map(|e| match &e.decoded {
            Some(ExtensionValue::SubjectAltName(names)) => Some(names.as_slice()),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgorithmIdentifier {
    pub oid: Oid,
    pub parameters: Option<Asn1Value>,
    /// The complete encoded AlgorithmIdentifier.
    pub raw: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NameAttribute {
    pub oid: Oid,
    /// String value, or `#` followed by hex for non-string values.
    pub value: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Name {
    pub attributes: Vec<NameAttribute>,
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, attr) in self.attributes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let label = match attr.oid.arcs() {
                a if a == oids::COMMON_NAME => "CN".to_string(),
                a if a == oids::COUNTRY => "C".to_string(),
                a if a == oids::ORGANIZATION => "O".to_string(),
                a if a == oids::ORGANIZATIONAL_UNIT => "OU".to_string(),
                _ => attr.oid.to_string(),
            };
            write!(f, "{label}={}", attr.value)?;
        }
        Ok(())
    }
}

/// A validity bound. `instant` is `None` when only the lenient reader was
/// applied and it could not make sense of the text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Time {
    pub tag: Tag,
    pub text: String,
    pub instant: Option<DateTime<Utc>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveRef {
    Named(CurveId),
    Unknown(Oid),
    Explicit,
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PublicKey {
    Rsa { modulus: BigInt, exponent: BigInt },
    Ec { curve: CurveRef, point: Vec<u8> },
    Other(Oid),
    /// Known algorithm whose key bytes could not be decoded.
    Malformed { algorithm: Oid, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKeyInfo {
    pub algorithm: AlgorithmIdentifier,
    pub key: PublicKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneralName {
    Email(String),
    Dns(String),
    Uri(String),
    IpAddress(Vec<u8>),
    DirectoryName(Name),
    Other { tag: Tag, raw: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionValue {
    SubjectAltName(Vec<GeneralName>),
    IssuerAltName(Vec<GeneralName>),
    BasicConstraints { ca: bool, path_len: Option<BigInt> },
    KeyUsage { unused_bits: u8, bits: Vec<u8> },
    SubjectKeyIdentifier(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub oid: Oid,
    pub critical: bool,
    pub value: Vec<u8>,
    pub decoded: Option<ExtensionValue>,
    /// Why a recognized extension's value failed to decode.
    pub decode_error: Option<String>,
}

impl Extension {
    pub fn is_known(&self) -> bool {
        oids::KNOWN_EXTENSIONS.iter().any(|k| self.oid.is(k))
    }
}

type Mapped<T> = Result<T, CategorizedError>;

fn structure_err(message: impl Into<String>, offset: usize) -> CategorizedError {
    CategorizedError::new(ErrorCategory::X509ParseError, super::check_id::STRUCTURE, message)
        .with_offset(offset)
}

/// Walks the children of a constructed value in order.
struct Fields<'a> {
    parent: &'a Asn1Value,
    children: &'a [Asn1Value],
    pos: usize,
}

impl<'a> Fields<'a> {
    fn new(parent: &'a Asn1Value, what: &str) -> Mapped<Self> {
        let children = parent
            .children()
            .ok_or_else(|| structure_err(format!("{what} is not constructed"), parent.span.offset))?;
        Ok(Fields {
            parent,
            children,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&'a Asn1Value> {
        self.children.get(self.pos)
    }

    fn next(&mut self, tag: Tag, what: &str) -> Mapped<&'a Asn1Value> {
        match self.peek() {
            Some(v) if v.tag == tag => {
                self.pos += 1;
                Ok(v)
            }
            Some(v) => Err(structure_err(
                format!("expected {what} {tag}, found {}", v.tag),
                v.span.offset,
            )),
            None => Err(structure_err(format!("missing {what}"), self.parent.span.end())),
        }
    }

    fn next_if(&mut self, tag: Tag) -> Option<&'a Asn1Value> {
        let v = self.peek().filter(|v| v.tag == tag)?;
        self.pos += 1;
        Some(v)
    }

    fn finish(&self, what: &str) -> Mapped<()> {
        match self.peek() {
            Some(v) => Err(structure_err(format!("unexpected trailing field in {what}"), v.span.offset)),
            None => Ok(()),
        }
    }
}

/// Maps a decoded tree onto the certificate structure.
pub(crate) fn map_certificate(
    tree: &Asn1Value,
    der: &[u8],
    opts: &DecodeOptions,
    strict_time: bool,
) -> Mapped<Certificate> {
    if tree.tag != Tag::SEQUENCE {
        return Err(structure_err("certificate is not a SEQUENCE", 0));
    }
    let mut cert = Fields::new(tree, "certificate")?;
    let tbs = cert.next(Tag::SEQUENCE, "tbsCertificate")?;
    let outer_alg = cert.next(Tag::SEQUENCE, "signatureAlgorithm")?;
    let sig = cert.next(Tag::BIT_STRING, "signatureValue")?;
    cert.finish("certificate")?;

    let mut f = Fields::new(tbs, "tbsCertificate")?;
    let version = match f.next_if(Tag::context(0, true)) {
        Some(wrapper) => {
            let mut inner = Fields::new(wrapper, "version")?;
            let v = inner.next(Tag::INTEGER, "version")?;
            inner.finish("version")?;
            let value = v.as_integer().unwrap_or_default();
            value
                .to_i64()
                .unwrap_or(if value.sign() == num_bigint::Sign::Minus { i64::MIN } else { i64::MAX })
        }
        None => 0,
    };
    let serial = f.next(Tag::INTEGER, "serialNumber")?.as_integer().unwrap_or_default();
    let tbs_sig_alg = algorithm_identifier(f.next(Tag::SEQUENCE, "signature")?, der)?;
    let issuer = name(f.next(Tag::SEQUENCE, "issuer")?)?;
    let validity = f.next(Tag::SEQUENCE, "validity")?;
    let subject = name(f.next(Tag::SEQUENCE, "subject")?)?;
    let spki = public_key_info(f.next(Tag::SEQUENCE, "subjectPublicKeyInfo")?, der, opts)?;
    for number in [1, 2] {
        if let Some(uid) = f.peek().filter(|v| v.tag.class == Class::Context && v.tag.number == number) {
            if uid.tag.constructed {
                return Err(structure_err("unique identifier must be primitive", uid.span.offset));
            }
            f.pos += 1;
        }
    }
    let extensions = match f.next_if(Tag::context(3, true)) {
        Some(wrapper) => {
            let mut inner = Fields::new(wrapper, "extensions")?;
            let list = inner.next(Tag::SEQUENCE, "extensions")?;
            inner.finish("extensions")?;
            let exts = list
                .children()
                .unwrap_or(&[])
                .iter()
                .map(|e| extension(e, opts))
                .collect::<Mapped<Vec<_>>>()?;
            Some(exts)
        }
        None => None,
    };
    f.finish("tbsCertificate")?;

    let mut v = Fields::new(validity, "validity")?;
    let not_before = time(v.peek(), validity, strict_time, "notBefore")?;
    v.pos += 1;
    let not_after = time(v.peek(), validity, strict_time, "notAfter")?;
    v.pos += 1;
    v.finish("validity")?;

    let (unused, signature) = sig.as_bit_string().unwrap_or((0, &[]));
    if unused != 0 {
        return Err(structure_err("signature has unused bits", sig.span.offset));
    }

    Ok(Certificate {
        version,
        serial,
        tbs_sig_alg,
        outer_sig_alg: algorithm_identifier(outer_alg, der)?,
        issuer,
        subject,
        not_before,
        not_after,
        spki,
        extensions,
        signature: signature.to_vec(),
        raw_tbs_span: tbs.span,
        raw_der: der.to_vec(),
    })
}

fn time(v: Option<&Asn1Value>, parent: &Asn1Value, strict: bool, what: &str) -> Mapped<Time> {
    let v = v.ok_or_else(|| structure_err(format!("missing {what}"), parent.span.end()))?;
    if v.tag != Tag::UTC_TIME && v.tag != Tag::GENERALIZED_TIME {
        return Err(structure_err(format!("{what} is not a time"), v.span.offset));
    }
    let content = v.primitive().unwrap_or_default();
    let instant = if strict {
        // the decoder already enforced the strict syntax
        parse_time(v).ok()
    } else {
        parse_time_lenient(v.tag, content)
    };
    Ok(Time {
        tag: v.tag,
        text: String::from_utf8_lossy(content).into_owned(),
        instant,
    })
}

fn algorithm_identifier(v: &Asn1Value, der: &[u8]) -> Mapped<AlgorithmIdentifier> {
    let mut f = Fields::new(v, "AlgorithmIdentifier")?;
    let oid_value = f.next(Tag::OID, "algorithm")?;
    let oid = oid_value
        .as_oid()
        .ok_or_else(|| structure_err("malformed algorithm OID", oid_value.span.offset))?;
    let parameters = f.peek().cloned();
    if parameters.is_some() {
        f.pos += 1;
    }
    f.finish("AlgorithmIdentifier")?;
    Ok(AlgorithmIdentifier {
        oid,
        parameters,
        raw: der[v.span.range()].to_vec(),
    })
}

fn name(v: &Asn1Value) -> Mapped<Name> {
    let mut attributes = Vec::new();
    for rdn in v.children().unwrap_or(&[]) {
        if rdn.tag != Tag::SET {
            return Err(structure_err("relative distinguished name is not a SET", rdn.span.offset));
        }
        let atvs = rdn.children().unwrap_or(&[]);
        if atvs.is_empty() {
            return Err(structure_err("empty relative distinguished name", rdn.span.offset));
        }
        for atv in atvs {
            if atv.tag != Tag::SEQUENCE {
                return Err(structure_err("attribute is not a SEQUENCE", atv.span.offset));
            }
            let mut f = Fields::new(atv, "attribute")?;
            let oid_value = f.next(Tag::OID, "attribute type")?;
            let value = f
                .peek()
                .ok_or_else(|| structure_err("missing attribute value", atv.span.end()))?;
            f.pos += 1;
            f.finish("attribute")?;
            let text = value.as_string().unwrap_or_else(|| {
                format!("#{}", hex::encode(value.primitive().unwrap_or_default()))
            });
            attributes.push(NameAttribute {
                oid: oid_value.as_oid().unwrap_or_else(|| Oid::from_static(&[0, 0])),
                value: text,
            });
        }
    }
    Ok(Name { attributes })
}

fn public_key_info(v: &Asn1Value, der: &[u8], opts: &DecodeOptions) -> Mapped<PublicKeyInfo> {
    let mut f = Fields::new(v, "subjectPublicKeyInfo")?;
    let algorithm = algorithm_identifier(f.next(Tag::SEQUENCE, "algorithm")?, der)?;
    let bits = f.next(Tag::BIT_STRING, "subjectPublicKey")?;
    f.finish("subjectPublicKeyInfo")?;
    let (unused, key_bytes) = bits.as_bit_string().unwrap_or((0, &[]));
    let malformed = |reason: &str| PublicKey::Malformed {
        algorithm: algorithm.oid.clone(),
        reason: reason.to_string(),
    };

    let key = if algorithm.oid.is(oids::RSA_ENCRYPTION) {
        if unused != 0 {
            malformed("key bit string has unused bits")
        } else {
            rsa_key(key_bytes, opts).unwrap_or_else(|| malformed("RSAPublicKey does not decode"))
        }
    } else if algorithm.oid.is(oids::EC_PUBLIC_KEY) {
        let curve = match &algorithm.parameters {
            Some(p) if p.tag == Tag::OID => match p.as_oid() {
                Some(oid) => CurveId::from_oid(&oid).map_or(CurveRef::Unknown(oid), CurveRef::Named),
                None => CurveRef::Missing,
            },
            Some(p) if p.tag == Tag::SEQUENCE => CurveRef::Explicit,
            _ => CurveRef::Missing,
        };
        if unused != 0 {
            malformed("key bit string has unused bits")
        } else {
            PublicKey::Ec {
                curve,
                point: key_bytes.to_vec(),
            }
        }
    } else {
        PublicKey::Other(algorithm.oid.clone())
    };
    Ok(PublicKeyInfo { algorithm, key })
}

fn rsa_key(bytes: &[u8], opts: &DecodeOptions) -> Option<PublicKey> {
    let seq = decode_with(bytes, opts).ok()?;
    match seq.children()? {
        [n, e] if seq.tag == Tag::SEQUENCE => Some(PublicKey::Rsa {
            modulus: n.as_integer()?,
            exponent: e.as_integer()?,
        }),
        _ => None,
    }
}

fn extension(v: &Asn1Value, opts: &DecodeOptions) -> Mapped<Extension> {
    if v.tag != Tag::SEQUENCE {
        return Err(structure_err("extension is not a SEQUENCE", v.span.offset));
    }
    let mut f = Fields::new(v, "extension")?;
    let oid_value = f.next(Tag::OID, "extnID")?;
    let critical = f.next_if(Tag::BOOLEAN).and_then(Asn1Value::as_bool).unwrap_or(false);
    let value = f.next(Tag::OCTET_STRING, "extnValue")?;
    f.finish("extension")?;
    let oid = oid_value
        .as_oid()
        .ok_or_else(|| structure_err("malformed extension OID", oid_value.span.offset))?;
    let value = value.primitive().unwrap_or_default().to_vec();
    let (decoded, decode_error) = match decode_extension_value(&oid, &value, opts) {
        Ok(d) => (d, None),
        Err(e) => (None, Some(e)),
    };
    Ok(Extension {
        oid,
        critical,
        value,
        decoded,
        decode_error,
    })
}

fn decode_extension_value(
    oid: &Oid,
    value: &[u8],
    opts: &DecodeOptions,
) -> Result<Option<ExtensionValue>, String> {
    let arcs = oid.arcs();
    let known = [
        oids::SUBJECT_ALT_NAME,
        oids::ISSUER_ALT_NAME,
        oids::BASIC_CONSTRAINTS,
        oids::KEY_USAGE,
        oids::SUBJECT_KEY_IDENTIFIER,
    ];
    if !known.contains(&arcs) {
        return Ok(None);
    }
    let v = decode_with(value, opts).map_err(|e| format!("value is not DER: {e}"))?;
    let decoded = match arcs {
        a if a == oids::SUBJECT_ALT_NAME => ExtensionValue::SubjectAltName(general_names(&v)?),
        a if a == oids::ISSUER_ALT_NAME => ExtensionValue::IssuerAltName(general_names(&v)?),
        a if a == oids::BASIC_CONSTRAINTS => {
            if v.tag != Tag::SEQUENCE {
                return Err("basicConstraints is not a SEQUENCE".into());
            }
            let (ca, path_len) = match v.children().unwrap_or(&[]) {
                [] => (false, None),
                [b] if b.tag == Tag::BOOLEAN => (b.as_bool().unwrap_or(false), None),
                [i] if i.tag == Tag::INTEGER => (false, i.as_integer()),
                [b, i] if b.tag == Tag::BOOLEAN && i.tag == Tag::INTEGER => {
                    (b.as_bool().unwrap_or(false), i.as_integer())
                }
                _ => return Err("malformed basicConstraints".into()),
            };
            ExtensionValue::BasicConstraints { ca, path_len }
        }
        a if a == oids::KEY_USAGE => {
            let (unused_bits, bits) = v.as_bit_string().ok_or("keyUsage is not a BIT STRING")?;
            ExtensionValue::KeyUsage {
                unused_bits,
                bits: bits.to_vec(),
            }
        }
        _ => ExtensionValue::SubjectKeyIdentifier(
            v.as_octet_string().ok_or("subjectKeyIdentifier is not an OCTET STRING")?.to_vec(),
        ),
    };
    Ok(Some(decoded))
}

fn general_names(v: &Asn1Value) -> Result<Vec<GeneralName>, String> {
    if v.tag != Tag::SEQUENCE {
        return Err("GeneralNames is not a SEQUENCE".into());
    }
    let entries = v.children().unwrap_or(&[]);
    if entries.is_empty() {
        return Err("empty GeneralNames".into());
    }
    entries.iter().enumerate().map(|(i, e)| general_name(i, e)).collect()
}

fn general_name(index: usize, v: &Asn1Value) -> Result<GeneralName, String> {
    if v.tag.class != Class::Context {
        return Err(format!("entry {index} is not context-tagged"));
    }
    let ia5 = |bytes: &[u8]| -> Result<String, String> {
        if bytes.is_ascii() {
            Ok(String::from_utf8_lossy(bytes).into_owned())
        } else {
            Err(format!("entry {index} is not IA5String"))
        }
    };
    let expect_primitive = || v.primitive().ok_or_else(|| format!("entry {index} must be primitive"));
    Ok(match v.tag.number {
        1 => GeneralName::Email(ia5(expect_primitive()?)?),
        2 => GeneralName::Dns(ia5(expect_primitive()?)?),
        6 => GeneralName::Uri(ia5(expect_primitive()?)?),
        7 => GeneralName::IpAddress(expect_primitive()?.to_vec()),
        4 => match v.children() {
            Some([inner]) if inner.tag == Tag::SEQUENCE => {
                GeneralName::DirectoryName(name(inner).map_err(|e| e.message)?)
            }
            _ => return Err(format!("entry {index} is not a directory name")),
        },
        _ => GeneralName::Other {
            tag: v.tag,
            raw: v.primitive().map(<[u8]>::to_vec).unwrap_or_default(),
        },
    })
}
