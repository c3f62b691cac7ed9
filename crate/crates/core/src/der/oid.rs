use std::fmt;
use std::str::FromStr;

use super::tag::{base128_len, write_base128};

/// An OBJECT IDENTIFIER as its list of arcs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Oid(Vec<u64>);

impl Oid {
    /// Builds an OID from arcs. Returns `None` when the first two arcs cannot
    /// be packed into a single subidentifier.
    pub fn new(arcs: &[u64]) -> Option<Self> {
        if arcs.len() < 2 || arcs[0] > 2 || (arcs[0] < 2 && arcs[1] >= 40) {
            return None;
        }
        if arcs[0] == 2 && arcs[1] > u64::MAX - 80 {
            return None;
        }
        Some(Oid(arcs.to_vec()))
    }

    /// Builds an OID from a static arc list known to be valid.
    pub fn from_static(arcs: &[u64]) -> Self {
        Oid::new(arcs).expect("static OID arcs are valid")
    }

    pub fn arcs(&self) -> &[u64] {
        &self.0
    }

    pub fn is(&self, arcs: &[u64]) -> bool {
        self.0 == arcs
    }

    /// Decodes OID content octets. `None` on any DER violation.
    pub fn from_der_content(content: &[u8]) -> Option<Self> {
        if content.is_empty() {
            return None;
        }
        let mut arcs = Vec::with_capacity(content.len() + 1);
        let mut pos = 0;
        while pos < content.len() {
            if content[pos] == 0x80 {
                return None;
            }
            let mut value: u64 = 0;
            loop {
                let b = *content.get(pos)?;
                if value > (u64::MAX >> 7) {
                    return None;
                }
                value = (value << 7) | (b & 0x7f) as u64;
                pos += 1;
                if b & 0x80 == 0 {
                    break;
                }
            }
            if arcs.is_empty() {
                let (first, second) = match value {
                    0..=39 => (0, value),
                    40..=79 => (1, value - 40),
                    _ => (2, value - 80),
                };
                arcs.push(first);
                arcs.push(second);
            } else {
                arcs.push(value);
            }
        }
        Some(Oid(arcs))
    }

    pub fn content_len(&self) -> usize {
        let head = base128_len(self.0[0] * 40 + self.0[1]);
        head + self.0[2..].iter().map(|a| base128_len(*a)).sum::<usize>()
    }

    pub fn write_content(&self, out: &mut Vec<u8>) {
        write_base128(self.0[0] * 40 + self.0[1], out);
        for arc in &self.0[2..] {
            write_base128(*arc, out);
        }
    }
}

impl fmt::Display for Oid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, arc) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{arc}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid object identifier {0:?}")]
pub struct OidParseError(String);

impl FromStr for Oid {
    type Err = OidParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let arcs = s
            .split('.')
            .map(|p| p.parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| OidParseError(s.to_string()))?;
        Oid::new(&arcs).ok_or_else(|| OidParseError(s.to_string()))
    }
}
