//! UTCTime and GeneralizedTime handling.
//!
//! The strict forms are the only ones DER allows for certificates:
//! `YYMMDDHHMMSSZ` and `YYYYMMDDHHMMSSZ`. The lenient reader additionally
//! takes the BER-era variants (missing seconds, numeric zone offsets,
//! fractional seconds) that permissive parsers tolerate.

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};

use super::{Asn1Value, DecodeError, DecodeErrorKind, Tag};

/// Parses a decoded UTCTime or GeneralizedTime value in strict DER form.
pub fn parse_time(value: &Asn1Value) -> Result<DateTime<Utc>, DecodeError> {
    let err = DecodeError::new(DecodeErrorKind::BadTimeSyntax, value.span.offset);
    let content = value.primitive().ok_or(err)?;
    match value.tag {
        Tag::UTC_TIME => parse_utc_time(content),
        Tag::GENERALIZED_TIME => parse_generalized_time(content),
        _ => None,
    }
    .ok_or(err)
}

pub(crate) fn parse_utc_time(content: &[u8]) -> Option<DateTime<Utc>> {
    if content.len() != 13 || content[12] != b'Z' {
        return None;
    }
    let yy = digits(&content[0..2])?;
    let year = if yy < 50 { 2000 + yy } else { 1900 + yy };
    let rest = fields(&content[2..12])?;
    assemble(year as i32, rest)
}

pub(crate) fn parse_generalized_time(content: &[u8]) -> Option<DateTime<Utc>> {
    if content.len() != 15 || content[14] != b'Z' {
        return None;
    }
    let year = digits(&content[0..4])?;
    let rest = fields(&content[4..14])?;
    assemble(year as i32, rest)
}

/// Best-effort reading of a time value that failed (or skipped) the strict
/// check. Returns `None` when nothing sensible can be recovered.
pub fn parse_time_lenient(tag: Tag, content: &[u8]) -> Option<DateTime<Utc>> {
    let text = std::str::from_utf8(content).ok()?;
    let (year, body) = match tag {
        Tag::UTC_TIME => {
            let yy = digits(text.get(0..2)?.as_bytes())?;
            (if yy < 50 { 2000 + yy } else { 1900 + yy }, &text[2..])
        }
        Tag::GENERALIZED_TIME => (digits(text.get(0..4)?.as_bytes())?, &text[4..]),
        _ => return None,
    };
    let bytes = body.as_bytes();
    let month = digits(bytes.get(0..2)?)?;
    let day = digits(bytes.get(2..4)?)?;
    let hour = digits(bytes.get(4..6)?)?;
    let minute = digits(bytes.get(6..8)?)?;
    let mut pos = 8;
    let mut second = 0;
    if let Some(s) = bytes.get(8..10).and_then(digits) {
        second = s;
        pos = 10;
        if bytes.get(pos) == Some(&b'.') {
            pos += 1;
            while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                pos += 1;
            }
        }
    }
    let base = assemble(year as i32, [month, day, hour, minute, second])?;
    match &bytes[pos..] {
        b"Z" | b"" => Some(base),
        [sign @ (b'+' | b'-'), zone @ ..] if zone.len() == 4 => {
            let hh = digits(&zone[0..2])? as i64;
            let mm = digits(&zone[2..4])? as i64;
            if hh > 23 || mm > 59 {
                return None;
            }
            let offset = Duration::minutes(hh * 60 + mm);
            Some(if *sign == b'+' {
                base - offset
            } else {
                base + offset
            })
        }
        _ => None,
    }
}

/// Formats an instant as DER UTCTime content. Years outside 1950..2050
/// cannot be represented and yield `None`.
pub fn format_utc_time(t: &DateTime<Utc>) -> Option<String> {
    let year = t.format("%Y").to_string().parse::<i32>().ok()?;
    if !(1950..2050).contains(&year) {
        return None;
    }
    Some(t.format("%y%m%d%H%M%SZ").to_string())
}

pub fn format_generalized_time(t: &DateTime<Utc>) -> String {
    t.format("%Y%m%d%H%M%SZ").to_string()
}

fn digits(b: &[u8]) -> Option<u32> {
    if b.is_empty() || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(b.iter().fold(0, |acc, d| acc * 10 + (d - b'0') as u32))
}

fn fields(b: &[u8]) -> Option<[u32; 5]> {
    Some([
        digits(&b[0..2])?,
        digits(&b[2..4])?,
        digits(&b[4..6])?,
        digits(&b[6..8])?,
        digits(&b[8..10])?,
    ])
}

fn assemble(year: i32, [month, day, hour, minute, second]: [u32; 5]) -> Option<DateTime<Utc>> {
    let naive = NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, second)?;
    Some(Utc.from_utc_datetime(&naive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::der::Content;

    fn utc(text: &str) -> Asn1Value {
        Asn1Value::new(Tag::UTC_TIME, Content::Primitive(text.as_bytes().to_vec()))
    }

    fn gen(text: &str) -> Asn1Value {
        Asn1Value::new(
            Tag::GENERALIZED_TIME,
            Content::Primitive(text.as_bytes().to_vec()),
        )
    }

    fn ymd(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    #[test]
    fn utc_time_direct_mapping() {
        assert_eq!(parse_time(&utc("230701000000Z")).unwrap(), ymd(2023, 7, 1));
    }

    #[test]
    fn two_digit_year_window() {
        assert_eq!(parse_time(&utc("490101000000Z")).unwrap(), ymd(2049, 1, 1));
        assert_eq!(parse_time(&utc("500101000000Z")).unwrap(), ymd(1950, 1, 1));
        assert_eq!(parse_time(&utc("991231000000Z")).unwrap(), ymd(1999, 12, 31));
    }

    #[test]
    fn utc_time_without_seconds_rejected() {
        let err = parse_time(&utc("2307010000Z")).unwrap_err();
        assert_eq!(err.kind, DecodeErrorKind::BadTimeSyntax);
    }

    #[test]
    fn utc_time_with_offset_rejected() {
        let err = parse_time(&utc("230701000000+0100")).unwrap_err();
        assert_eq!(err.kind, DecodeErrorKind::BadTimeSyntax);
    }

    #[test]
    fn calendar_validity() {
        assert!(parse_time(&gen("20230229000000Z")).is_err());
        assert_eq!(parse_time(&gen("20240229000000Z")).unwrap(), ymd(2024, 2, 29));
        assert!(parse_time(&gen("20230431000000Z")).is_err());
        assert!(parse_time(&gen("20231301000000Z")).is_err());
        assert!(parse_time(&gen("20230101240000Z")).is_err());
        assert!(parse_time(&gen("19000229000000Z")).is_err());
        assert!(parse_time(&gen("20000229000000Z")).is_ok());
    }

    #[test]
    fn generalized_time_fraction_rejected() {
        assert!(parse_time(&gen("20230701000000.5Z")).is_err());
        assert!(parse_time(&gen("20230701000000")).is_err());
    }

    #[test]
    fn lenient_reader_recovers_variants() {
        assert_eq!(
            parse_time_lenient(Tag::UTC_TIME, b"2307010000Z"),
            Some(ymd(2023, 7, 1))
        );
        assert_eq!(
            parse_time_lenient(Tag::UTC_TIME, b"230701010000+0100"),
            Some(ymd(2023, 7, 1))
        );
        assert_eq!(
            parse_time_lenient(Tag::GENERALIZED_TIME, b"20230701000000.123Z"),
            Some(ymd(2023, 7, 1))
        );
        assert_eq!(parse_time_lenient(Tag::UTC_TIME, b"garbage"), None);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_utc_time(&ymd(2023, 7, 1)).unwrap(), "230701000000Z");
        assert_eq!(format_utc_time(&ymd(2050, 1, 1)), None);
        assert_eq!(format_generalized_time(&ymd(2050, 1, 1)), "20500101000000Z");
    }
}
