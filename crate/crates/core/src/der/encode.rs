use chrono::{DateTime, Utc};
use num_bigint::BigInt;

use super::time::{format_generalized_time, format_utc_time};
use super::{Asn1Value, Class, Content, Oid, Tag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("tag {0} does not match the form of its content")]
    FormMismatch(Tag),
    #[error("tag {0} has no DER encoding")]
    UnencodableTag(Tag),
}

/// Emits canonical DER for `value`. SET children are written in ascending
/// encoded order regardless of their order in the tree.
pub fn encode(value: &Asn1Value) -> Result<Vec<u8>, EncodeError> {
    let mut out = Vec::new();
    write_value(value, &mut out)?;
    Ok(out)
}

fn write_value(value: &Asn1Value, out: &mut Vec<u8>) -> Result<(), EncodeError> {
    let tag = value.tag;
    if tag.class == Class::Universal && tag.number == 0 {
        return Err(EncodeError::UnencodableTag(tag));
    }
    match &value.content {
        Content::Primitive(bytes) => {
            if tag.constructed {
                return Err(EncodeError::FormMismatch(tag));
            }
            write_header(tag, bytes.len(), out);
            out.extend_from_slice(bytes);
        }
        Content::Constructed(children) => {
            if !tag.constructed {
                return Err(EncodeError::FormMismatch(tag));
            }
            let mut encoded = Vec::with_capacity(children.len());
            for child in children {
                let mut buf = Vec::new();
                write_value(child, &mut buf)?;
                encoded.push(buf);
            }
            if tag == Tag::SET {
                encoded.sort();
            }
            let len = encoded.iter().map(Vec::len).sum();
            write_header(tag, len, out);
            for buf in encoded {
                out.extend_from_slice(&buf);
            }
        }
    }
    Ok(())
}

pub(crate) fn write_header(tag: Tag, len: usize, out: &mut Vec<u8>) {
    tag.write(out);
    write_length(len, out);
}

pub(crate) fn write_length(len: usize, out: &mut Vec<u8>) {
    if len < 0x80 {
        out.push(len as u8);
        return;
    }
    let bytes = len.to_be_bytes();
    let skip = bytes.iter().take_while(|b| **b == 0).count();
    out.push(0x80 | (bytes.len() - skip) as u8);
    out.extend_from_slice(&bytes[skip..]);
}

/// Constructors for common universal values.
impl Asn1Value {
    pub fn boolean(value: bool) -> Self {
        Asn1Value::new(Tag::BOOLEAN, Content::Primitive(vec![if value { 0xff } else { 0 }]))
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        let value: BigInt = value.into();
        Asn1Value::new(Tag::INTEGER, Content::Primitive(value.to_signed_bytes_be()))
    }

    /// INTEGER from raw content octets, written as given.
    pub fn integer_raw(content: Vec<u8>) -> Self {
        Asn1Value::new(Tag::INTEGER, Content::Primitive(content))
    }

    pub fn null() -> Self {
        Asn1Value::new(Tag::NULL, Content::Primitive(Vec::new()))
    }

    pub fn oid(oid: &Oid) -> Self {
        let mut content = Vec::with_capacity(oid.content_len());
        oid.write_content(&mut content);
        Asn1Value::new(Tag::OID, Content::Primitive(content))
    }

    pub fn octet_string(bytes: Vec<u8>) -> Self {
        Asn1Value::new(Tag::OCTET_STRING, Content::Primitive(bytes))
    }

    /// BIT STRING holding whole octets.
    pub fn bit_string(bytes: &[u8]) -> Self {
        let mut content = Vec::with_capacity(bytes.len() + 1);
        content.push(0);
        content.extend_from_slice(bytes);
        Asn1Value::new(Tag::BIT_STRING, Content::Primitive(content))
    }

    pub fn utf8_string(text: &str) -> Self {
        Asn1Value::new(Tag::UTF8_STRING, Content::Primitive(text.as_bytes().to_vec()))
    }

    pub fn printable_string(text: &str) -> Self {
        Asn1Value::new(Tag::PRINTABLE_STRING, Content::Primitive(text.as_bytes().to_vec()))
    }

    pub fn ia5_string(text: &str) -> Self {
        Asn1Value::new(Tag::IA5_STRING, Content::Primitive(text.as_bytes().to_vec()))
    }

    /// UTCTime for years 1950..2050, GeneralizedTime otherwise.
    pub fn time(t: &DateTime<Utc>) -> Self {
        match format_utc_time(t) {
            Some(text) => Asn1Value::new(Tag::UTC_TIME, Content::Primitive(text.into_bytes())),
            None => Asn1Value::new(
                Tag::GENERALIZED_TIME,
                Content::Primitive(format_generalized_time(t).into_bytes()),
            ),
        }
    }

    pub fn sequence(children: Vec<Asn1Value>) -> Self {
        Asn1Value::new(Tag::SEQUENCE, Content::Constructed(children))
    }

    /// SET with children placed in canonical order, so that the tree equals
    /// its own decoding.
    pub fn set(children: Vec<Asn1Value>) -> Self {
        let mut keyed: Vec<(Vec<u8>, Asn1Value)> = children
            .into_iter()
            .map(|c| (encode(&c).unwrap_or_default(), c))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        Asn1Value::new(
            Tag::SET,
            Content::Constructed(keyed.into_iter().map(|(_, c)| c).collect()),
        )
    }

    /// `[n] EXPLICIT` wrapper.
    pub fn explicit(number: u32, inner: Asn1Value) -> Self {
        Asn1Value::new(Tag::context(number, true), Content::Constructed(vec![inner]))
    }

    /// `[n] IMPLICIT` primitive.
    pub fn implicit(number: u32, content: Vec<u8>) -> Self {
        Asn1Value::new(Tag::context(number, false), Content::Primitive(content))
    }
}
