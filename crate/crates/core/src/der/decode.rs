use super::strings::charset_ok;
use super::tag::TagError;
use super::time::{parse_generalized_time, parse_utc_time};
use super::{
    Asn1Value, Class, Content, DecodeError, DecodeErrorKind, DecodeOptions, DerRules, Oid, Span,
    Tag,
};

use DecodeErrorKind::*;

/// Decodes exactly one DER value spanning all of `bytes`, with every
/// strictness rule enabled and the default size and depth bounds.
pub fn decode(bytes: &[u8]) -> Result<Asn1Value, DecodeError> {
    decode_with(bytes, &DecodeOptions::default())
}

pub fn decode_with(bytes: &[u8], opts: &DecodeOptions) -> Result<Asn1Value, DecodeError> {
    if bytes.is_empty() {
        return Err(DecodeError::new(Truncated, 0));
    }
    if bytes.len() > opts.max_size {
        return Err(DecodeError::new(InputTooLarge, opts.max_size));
    }
    let decoder = Decoder { input: bytes, opts };
    let value = decoder.value(0, bytes.len(), 1)?;
    let end = value.span.end();
    if end != bytes.len() {
        return Err(DecodeError::new(TrailingData, end));
    }
    Ok(value)
}

struct Decoder<'a> {
    input: &'a [u8],
    opts: &'a DecodeOptions,
}

fn err<T>(kind: DecodeErrorKind, offset: usize) -> Result<T, DecodeError> {
    Err(DecodeError::new(kind, offset))
}

impl Decoder<'_> {
    fn rules(&self) -> &DerRules {
        &self.opts.rules
    }

    /// Decodes the value starting at `start`, which must end at or before
    /// `limit`.
    fn value(&self, start: usize, limit: usize, depth: usize) -> Result<Asn1Value, DecodeError> {
        if depth > self.opts.max_depth {
            return err(NestingTooDeep, start);
        }
        let (tag, tag_len) = Tag::read(&self.input[start..limit]).map_err(|e| match e {
            TagError::Truncated => DecodeError::new(Truncated, start),
            TagError::NonMinimal => DecodeError::new(BadTag, start),
        })?;
        if tag.class == Class::Universal && tag.number == 0 {
            return err(BadTag, start);
        }
        let (len, len_octets) = self.length(start, start + tag_len, limit)?;
        let header_len = tag_len + len_octets;
        let content_start = start + header_len;
        if len > limit - content_start {
            return err(Truncated, start);
        }
        let content_end = content_start + len;
        let span = Span {
            offset: start,
            header_len,
            len: header_len + len,
        };

        let content = if tag.constructed {
            if tag.class == Class::Universal && !matches!(tag.number, 8 | 11 | 16 | 17 | 29) {
                return err(BadConstructedForm, start);
            }
            let mut children = Vec::new();
            let mut pos = content_start;
            while pos < content_end {
                let child = self.value(pos, content_end, depth + 1)?;
                pos = child.span.end();
                children.push(child);
            }
            if tag == Tag::SET && self.rules().set_order {
                self.check_set_order(&children)?;
            }
            Content::Constructed(children)
        } else {
            let bytes = &self.input[content_start..content_end];
            if tag.class == Class::Universal {
                self.check_primitive(tag, bytes, start)?;
            }
            Content::Primitive(bytes.to_vec())
        };
        Ok(Asn1Value { tag, content, span })
    }

    /// Reads length octets at `pos`; returns `(content length, octet count)`.
    fn length(&self, start: usize, pos: usize, limit: usize) -> Result<(usize, usize), DecodeError> {
        let Some(&first) = self.input[..limit].get(pos) else {
            return err(Truncated, start);
        };
        if first < 0x80 {
            return Ok((first as usize, 1));
        }
        if first == 0x80 {
            return err(IndefiniteLength, pos);
        }
        let count = (first & 0x7f) as usize;
        let Some(octets) = self.input[..limit].get(pos + 1..pos + 1 + count) else {
            return err(Truncated, start);
        };
        if self.rules().minimal_length && octets[0] == 0 {
            return err(NonMinimalLength, pos);
        }
        let significant = &octets[octets.iter().take_while(|b| **b == 0).count()..];
        if significant.len() > std::mem::size_of::<usize>() {
            // cannot possibly fit inside a bounded input
            return err(Truncated, start);
        }
        let len = significant.iter().fold(0usize, |acc, b| (acc << 8) | *b as usize);
        if self.rules().minimal_length && len < 0x80 {
            return err(NonMinimalLength, pos);
        }
        Ok((len, 1 + count))
    }

    fn check_set_order(&self, children: &[Asn1Value]) -> Result<(), DecodeError> {
        for pair in children.windows(2) {
            let a = &self.input[pair[0].span.range()];
            let b = &self.input[pair[1].span.range()];
            if a > b {
                return err(UnsortedSet, pair[1].span.offset);
            }
        }
        Ok(())
    }

    fn check_primitive(&self, tag: Tag, bytes: &[u8], start: usize) -> Result<(), DecodeError> {
        let rules = self.rules();
        match tag.number {
            16 | 17 => err(BadConstructedForm, start),
            1 if rules.boolean_values && !matches!(bytes, [0x00] | [0xff]) => err(BadBoolean, start),
            1 if bytes.len() != 1 => err(BadBoolean, start),
            2 | 10 => match bytes {
                [] => err(NonMinimalInteger, start),
                [0x00, next, ..] | [0xff, next, ..]
                    if rules.minimal_integer && (bytes[0] == 0x00) == (*next < 0x80) =>
                {
                    err(NonMinimalInteger, start)
                }
                _ => Ok(()),
            },
            3 => match bytes {
                [] => err(BadBitstringPadding, start),
                [unused, ..] if *unused > 7 => err(BadBitstringPadding, start),
                [unused] if *unused != 0 => err(BadBitstringPadding, start),
                [unused, .., last]
                    if rules.bit_string_padding && last & ((1u8 << unused) - 1) != 0 =>
                {
                    err(BadBitstringPadding, start)
                }
                _ => Ok(()),
            },
            5 if !bytes.is_empty() => err(BadNull, start),
            6 if rules.oid_syntax && Oid::from_der_content(bytes).is_none() => err(BadOid, start),
            23 if rules.time_syntax && parse_utc_time(bytes).is_none() => err(BadTimeSyntax, start),
            24 if rules.time_syntax && parse_generalized_time(bytes).is_none() => {
                err(BadTimeSyntax, start)
            }
            _ if rules.string_charset && !charset_ok(tag, bytes) => err(BadStringCharset, start),
            _ => Ok(()),
        }
    }
}
