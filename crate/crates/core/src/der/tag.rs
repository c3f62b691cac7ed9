use std::fmt;

/// Tag class, the two high bits of the identifier octet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Universal,
    Application,
    Context,
    Private,
}

impl Class {
    fn from_bits(bits: u8) -> Self {
        match bits & 0b11 {
            0 => Class::Universal,
            1 => Class::Application,
            2 => Class::Context,
            _ => Class::Private,
        }
    }

    fn bits(self) -> u8 {
        match self {
            Class::Universal => 0,
            Class::Application => 1,
            Class::Context => 2,
            Class::Private => 3,
        }
    }
}

/// Identifier of an ASN.1 value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub class: Class,
    pub constructed: bool,
    pub number: u32,
}

impl Tag {
    pub const BOOLEAN: Tag = Tag::universal(1);
    pub const INTEGER: Tag = Tag::universal(2);
    pub const BIT_STRING: Tag = Tag::universal(3);
    pub const OCTET_STRING: Tag = Tag::universal(4);
    pub const NULL: Tag = Tag::universal(5);
    pub const OID: Tag = Tag::universal(6);
    pub const ENUMERATED: Tag = Tag::universal(10);
    pub const UTF8_STRING: Tag = Tag::universal(12);
    pub const NUMERIC_STRING: Tag = Tag::universal(18);
    pub const PRINTABLE_STRING: Tag = Tag::universal(19);
    pub const T61_STRING: Tag = Tag::universal(20);
    pub const IA5_STRING: Tag = Tag::universal(22);
    pub const UTC_TIME: Tag = Tag::universal(23);
    pub const GENERALIZED_TIME: Tag = Tag::universal(24);
    pub const VISIBLE_STRING: Tag = Tag::universal(26);
    pub const UNIVERSAL_STRING: Tag = Tag::universal(28);
    pub const BMP_STRING: Tag = Tag::universal(30);
    pub const SEQUENCE: Tag = Tag {
        class: Class::Universal,
        constructed: true,
        number: 16,
    };
    pub const SET: Tag = Tag {
        class: Class::Universal,
        constructed: true,
        number: 17,
    };

    /// A primitive universal tag.
    pub const fn universal(number: u32) -> Self {
        Tag {
            class: Class::Universal,
            constructed: false,
            number,
        }
    }

    pub const fn context(number: u32, constructed: bool) -> Self {
        Tag {
            class: Class::Context,
            constructed,
            number,
        }
    }

    pub fn is_universal(&self, number: u32) -> bool {
        self.class == Class::Universal && self.number == number
    }

    /// Number of identifier octets this tag occupies in canonical form.
    pub fn encoded_len(&self) -> usize {
        if self.number < 31 {
            1
        } else {
            1 + base128_len(self.number as u64)
        }
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        let lead = (self.class.bits() << 6) | if self.constructed { 0x20 } else { 0 };
        if self.number < 31 {
            out.push(lead | self.number as u8);
        } else {
            out.push(lead | 0x1f);
            write_base128(self.number as u64, out);
        }
    }

    /// Reads identifier octets at `input[0..]`, returning the tag and the
    /// number of bytes consumed. Errors are `(kind, relative offset)`.
    pub(crate) fn read(input: &[u8]) -> Result<(Tag, usize), TagError> {
        let first = *input.first().ok_or(TagError::Truncated)?;
        let class = Class::from_bits(first >> 6);
        let constructed = first & 0x20 != 0;
        let low = first & 0x1f;
        if low != 0x1f {
            return Ok((
                Tag {
                    class,
                    constructed,
                    number: low as u32,
                },
                1,
            ));
        }
        let mut number: u64 = 0;
        let mut pos = 1;
        loop {
            let b = *input.get(pos).ok_or(TagError::Truncated)?;
            if pos == 1 && b == 0x80 {
                return Err(TagError::NonMinimal);
            }
            number = (number << 7) | (b & 0x7f) as u64;
            if number > u32::MAX as u64 {
                return Err(TagError::NonMinimal);
            }
            pos += 1;
            if b & 0x80 == 0 {
                break;
            }
        }
        if number < 31 {
            return Err(TagError::NonMinimal);
        }
        Ok((
            Tag {
                class,
                constructed,
                number: number as u32,
            },
            pos,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TagError {
    Truncated,
    NonMinimal,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.class {
            Class::Universal => "UNIVERSAL",
            Class::Application => "APPLICATION",
            Class::Context => "CONTEXT",
            Class::Private => "PRIVATE",
        };
        let form = if self.constructed { "c" } else { "p" };
        write!(f, "[{} {}]{}", class, self.number, form)
    }
}

pub(crate) fn base128_len(mut value: u64) -> usize {
    let mut n = 1;
    while value >= 0x80 {
        value >>= 7;
        n += 1;
    }
    n
}

pub(crate) fn write_base128(value: u64, out: &mut Vec<u8>) {
    let n = base128_len(value);
    for i in (0..n).rev() {
        let mut byte = ((value >> (7 * i)) & 0x7f) as u8;
        if i != 0 {
            byte |= 0x80;
        }
        out.push(byte);
    }
}
