//! Recognizer for the generic URI syntax (`URI` production of RFC 3986).

use std::net::Ipv6Addr;

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

fn is_sub_delim(b: u8) -> bool {
    matches!(
        b,
        b'!' | b'$' | b'&' | b'\'' | b'(' | b')' | b'*' | b'+' | b',' | b';' | b'='
    )
}

/// Checks that every byte is an allowed literal or part of a `%XX` escape.
fn all_chars(s: &[u8], extra: impl Fn(u8) -> bool) -> bool {
    let mut i = 0;
    while i < s.len() {
        let b = s[i];
        if b == b'%' {
            if i + 2 >= s.len() || !(s[i + 1].is_ascii_hexdigit() && s[i + 2].is_ascii_hexdigit()) {
                return false;
            }
            i += 3;
            continue;
        }
        if !(is_unreserved(b) || is_sub_delim(b) || extra(b)) {
            return false;
        }
        i += 1;
    }
    true
}

fn is_pchar_extra(b: u8) -> bool {
    matches!(b, b':' | b'@')
}

fn valid_segment(seg: &[u8]) -> bool {
    all_chars(seg, is_pchar_extra)
}

fn valid_path(path: &[u8]) -> bool {
    path.split(|b| *b == b'/').all(valid_segment)
}

fn valid_scheme(s: &[u8]) -> bool {
    match s.split_first() {
        Some((first, rest)) => {
            first.is_ascii_alphabetic()
                && rest
                    .iter()
                    .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'+' | b'-' | b'.'))
        }
        None => false,
    }
}

fn valid_ip_literal(inner: &[u8]) -> bool {
    if let Some(rest) = inner.strip_prefix(b"v").or_else(|| inner.strip_prefix(b"V")) {
        let Some(dot) = rest.iter().position(|b| *b == b'.') else {
            return false;
        };
        let (ver, tail) = (&rest[..dot], &rest[dot + 1..]);
        return !ver.is_empty()
            && ver.iter().all(u8::is_ascii_hexdigit)
            && !tail.is_empty()
            && tail
                .iter()
                .all(|b| is_unreserved(*b) || is_sub_delim(*b) || *b == b':');
    }
    std::str::from_utf8(inner)
        .ok()
        .is_some_and(|s| s.parse::<Ipv6Addr>().is_ok())
}

/// The host part of `authority`, if the authority is well formed.
fn parse_authority(auth: &[u8]) -> Option<&[u8]> {
    let host_port = match auth.iter().rposition(|b| *b == b'@') {
        Some(at) => {
            if !all_chars(&auth[..at], |b| b == b':') {
                return None;
            }
            &auth[at + 1..]
        }
        None => auth,
    };
    let (host, port) = if host_port.first() == Some(&b'[') {
        let close = host_port.iter().position(|b| *b == b']')?;
        if !valid_ip_literal(&host_port[1..close]) {
            return None;
        }
        let rest = &host_port[close + 1..];
        let port = match rest {
            [] => &[][..],
            [b':', port @ ..] => port,
            _ => return None,
        };
        (&host_port[..=close], port)
    } else {
        match host_port.iter().rposition(|b| *b == b':') {
            Some(colon) => (&host_port[..colon], &host_port[colon + 1..]),
            None => (host_port, &[][..]),
        }
    };
    if !port.iter().all(u8::is_ascii_digit) {
        return None;
    }
    // reg-name also covers IPv4address
    if host.first() != Some(&b'[') && !all_chars(host, |_| false) {
        return None;
    }
    Some(host)
}

/// Whether `s` is an absolute URI with optional fragment.
pub fn is_valid_uri(s: &str) -> bool {
    uri_host(s).is_some()
}

/// Host of a valid URI (empty when the URI has no authority). `None` when
/// `s` is not a valid URI.
pub fn uri_host(s: &str) -> Option<&str> {
    let bytes = s.as_bytes();
    let colon = bytes.iter().position(|b| *b == b':')?;
    if !valid_scheme(&bytes[..colon]) {
        return None;
    }
    let mut rest = &bytes[colon + 1..];
    if let Some(hash) = rest.iter().position(|b| *b == b'#') {
        if !all_chars(&rest[hash + 1..], |b| is_pchar_extra(b) || b == b'/' || b == b'?') {
            return None;
        }
        rest = &rest[..hash];
    }
    if let Some(q) = rest.iter().position(|b| *b == b'?') {
        if !all_chars(&rest[q + 1..], |b| is_pchar_extra(b) || b == b'/' || b == b'?') {
            return None;
        }
        rest = &rest[..q];
    }
    if let Some(after) = rest.strip_prefix(b"//") {
        let end = after.iter().position(|b| *b == b'/').unwrap_or(after.len());
        let host = parse_authority(&after[..end])?;
        if !valid_path(&after[end..]) {
            return None;
        }
        let start = host.as_ptr() as usize - bytes.as_ptr() as usize;
        return Some(&s[start..start + host.len()]);
    }
    // path-absolute, path-rootless or path-empty; "//" was handled above
    valid_path(rest).then_some("")
}
