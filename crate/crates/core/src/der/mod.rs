//! Strict DER decoding and canonical encoding for the ASN.1 subset used by
//! X.509 certificates.
//!
//! [`decode`] accepts exactly one definite-length value spanning the whole
//! input and rejects every non-canonical construction it can see: long-form
//! lengths that fit a shorter form, padded INTEGERs, BOOLEANs other than
//! `00`/`FF`, dirty BIT STRING padding, unsorted SET OF, malformed OIDs,
//! times outside the two DER profiles and strings outside their charset.
//! Individual rules can be relaxed through [`DerRules`].
//!
//! [`encode`] is the inverse: `decode(encode(v)) == v` for any well-formed
//! tree, and `encode(decode(b)) == b` for any accepted input.

mod decode;
mod encode;
mod oid;
mod strings;
mod tag;
mod time;

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub use decode::{decode, decode_with};
pub use encode::{encode, EncodeError};
pub use oid::{Oid, OidParseError};
pub use tag::{Class, Tag};
pub use time::{format_generalized_time, format_utc_time, parse_time, parse_time_lenient};

/// Largest input [`decode`] will look at.
pub const MAX_INPUT_SIZE: usize = 1 << 20;
/// Deepest nesting [`decode`] will follow; the outermost value is depth 1.
pub const MAX_DEPTH: usize = 32;

/// Location of an encoded value inside the buffer it was decoded from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    /// Offset of the first identifier octet.
    pub offset: usize,
    /// Identifier plus length octets.
    pub header_len: usize,
    /// Whole TLV length.
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    pub fn content_offset(&self) -> usize {
        self.offset + self.header_len
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.end()
    }

    pub fn contains(&self, other: &Span) -> bool {
        other.offset >= self.content_offset() && other.end() <= self.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Content {
    Primitive(Vec<u8>),
    Constructed(Vec<Asn1Value>),
}

/// A decoded tag-length-value node.
///
/// Equality compares tag and content only; spans describe where a value came
/// from, not what it is.
#[derive(Clone, Debug)]
pub struct Asn1Value {
    pub tag: Tag,
    pub content: Content,
    pub span: Span,
}

impl PartialEq for Asn1Value {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.content == other.content
    }
}

impl Eq for Asn1Value {}

impl Asn1Value {
    pub fn new(tag: Tag, content: Content) -> Self {
        Asn1Value {
            tag,
            content,
            span: Span::default(),
        }
    }

    pub fn primitive(&self) -> Option<&[u8]> {
        match &self.content {
            Content::Primitive(bytes) => Some(bytes),
            Content::Constructed(_) => None,
        }
    }

    pub fn children(&self) -> Option<&[Asn1Value]> {
        match &self.content {
            Content::Constructed(children) => Some(children),
            Content::Primitive(_) => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        match self.tag {
            Tag::INTEGER | Tag::ENUMERATED => {
                let bytes = self.primitive()?;
                (!bytes.is_empty()).then(|| BigInt::from_signed_bytes_be(bytes))
            }
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        if self.tag != Tag::BOOLEAN {
            return None;
        }
        match self.primitive()? {
            [0x00] => Some(false),
            [_] => Some(true),
            _ => None,
        }
    }

    pub fn as_oid(&self) -> Option<Oid> {
        if self.tag != Tag::OID {
            return None;
        }
        Oid::from_der_content(self.primitive()?)
    }

    /// `(unused bit count, data bytes)` of a BIT STRING.
    pub fn as_bit_string(&self) -> Option<(u8, &[u8])> {
        if self.tag != Tag::BIT_STRING {
            return None;
        }
        let (unused, data) = self.primitive()?.split_first()?;
        Some((*unused, data))
    }

    pub fn as_octet_string(&self) -> Option<&[u8]> {
        (self.tag == Tag::OCTET_STRING).then(|| self.primitive()).flatten()
    }

    /// Text of any of the character string types.
    pub fn as_string(&self) -> Option<String> {
        strings::to_text(self.tag, self.primitive()?)
    }

    pub fn is_null(&self) -> bool {
        self.tag == Tag::NULL && self.primitive().is_some_and(<[u8]>::is_empty)
    }
}

/// Reason a byte string is not acceptable DER.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeErrorKind {
    Truncated,
    IndefiniteLength,
    NonMinimalLength,
    NonMinimalInteger,
    BadBoolean,
    BadBitstringPadding,
    BadOid,
    BadTimeSyntax,
    TrailingData,
    NestingTooDeep,
    BadStringCharset,
    /// High-tag-number form used for a small number, or padded/oversized.
    BadTag,
    /// NULL with content.
    BadNull,
    /// SET OF elements not in ascending encoded order.
    UnsortedSet,
    /// Constructed encoding of a primitive-only type, or the reverse.
    BadConstructedForm,
    InputTooLarge,
}

impl DecodeErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeErrorKind::Truncated => "truncated",
            DecodeErrorKind::IndefiniteLength => "indefinite-length",
            DecodeErrorKind::NonMinimalLength => "non-minimal-length",
            DecodeErrorKind::NonMinimalInteger => "non-minimal-integer",
            DecodeErrorKind::BadBoolean => "bad-boolean",
            DecodeErrorKind::BadBitstringPadding => "bad-bitstring-padding",
            DecodeErrorKind::BadOid => "bad-oid",
            DecodeErrorKind::BadTimeSyntax => "bad-time-syntax",
            DecodeErrorKind::TrailingData => "trailing-data",
            DecodeErrorKind::NestingTooDeep => "nesting-too-deep",
            DecodeErrorKind::BadStringCharset => "bad-string-charset",
            DecodeErrorKind::BadTag => "bad-tag",
            DecodeErrorKind::BadNull => "bad-null",
            DecodeErrorKind::UnsortedSet => "unsorted-set",
            DecodeErrorKind::BadConstructedForm => "bad-constructed-form",
            DecodeErrorKind::InputTooLarge => "input-too-large",
        }
    }
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at offset {offset}")]
pub struct DecodeError {
    pub kind: DecodeErrorKind,
    pub offset: usize,
}

impl DecodeError {
    pub fn new(kind: DecodeErrorKind, offset: usize) -> Self {
        DecodeError { kind, offset }
    }
}

/// Individually switchable DER strictness rules. All on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerRules {
    pub minimal_length: bool,
    pub minimal_integer: bool,
    pub boolean_values: bool,
    pub bit_string_padding: bool,
    pub oid_syntax: bool,
    pub time_syntax: bool,
    pub set_order: bool,
    pub string_charset: bool,
}

impl DerRules {
    pub const STRICT: DerRules = DerRules {
        minimal_length: true,
        minimal_integer: true,
        boolean_values: true,
        bit_string_padding: true,
        oid_syntax: true,
        time_syntax: true,
        set_order: true,
        string_charset: true,
    };
}

impl Default for DerRules {
    fn default() -> Self {
        DerRules::STRICT
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    pub max_size: usize,
    pub max_depth: usize,
    pub rules: DerRules,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            max_size: MAX_INPUT_SIZE,
            max_depth: MAX_DEPTH,
            rules: DerRules::STRICT,
        }
    }
}
