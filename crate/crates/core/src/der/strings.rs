use super::Tag;

fn printable(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b" '()+,-./:=?".contains(&b)
}

/// Whether `content` is within the character set of string type `tag`.
/// Non-string tags and T61String (whose repertoire is open-ended in
/// practice) always pass.
pub(crate) fn charset_ok(tag: Tag, content: &[u8]) -> bool {
    match tag {
        Tag::UTF8_STRING => std::str::from_utf8(content).is_ok(),
        Tag::NUMERIC_STRING => content.iter().all(|b| b.is_ascii_digit() || *b == b' '),
        Tag::PRINTABLE_STRING => content.iter().copied().all(printable),
        Tag::IA5_STRING => content.is_ascii(),
        Tag::VISIBLE_STRING => content.iter().all(|b| (0x20..=0x7e).contains(b)),
        Tag::BMP_STRING => content.len().is_multiple_of(2) && bmp_units(content).all(|u| u.is_some()),
        Tag::UNIVERSAL_STRING => {
            content.len().is_multiple_of(4) && content.chunks(4).all(|c| ucs4(c).is_some())
        }
        _ => true,
    }
}

fn bmp_units(content: &[u8]) -> impl Iterator<Item = Option<char>> + '_ {
    content
        .chunks(2)
        .map(|c| char::from_u32(u16::from_be_bytes([c[0], c[1]]) as u32))
}

fn ucs4(c: &[u8]) -> Option<char> {
    char::from_u32(u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
}

pub(crate) fn to_text(tag: Tag, content: &[u8]) -> Option<String> {
    if !charset_ok(tag, content) {
        return None;
    }
    match tag {
        Tag::UTF8_STRING
        | Tag::NUMERIC_STRING
        | Tag::PRINTABLE_STRING
        | Tag::IA5_STRING
        | Tag::VISIBLE_STRING => Some(String::from_utf8_lossy(content).into_owned()),
        // Latin-1 is the usual reading of T61 bytes in certificates.
        Tag::T61_STRING => Some(content.iter().map(|b| *b as char).collect()),
        Tag::BMP_STRING => bmp_units(content).collect(),
        Tag::UNIVERSAL_STRING => content.chunks(4).map(ucs4).collect(),
        _ => None,
    }
}
