#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use num_bigint::BigInt;
use parseval::der::{decode, Asn1Value, Content, DecodeErrorKind, Oid, Tag};
use proptest::prelude::*;

pub fn oid_strategy() -> impl Strategy<Value = Oid> {
    (0u64..3, any::<u8>(), prop::collection::vec(any::<u64>(), 0..6)).prop_map(|(a, b, rest)| {
        let second = if a < 2 { u64::from(b) % 40 } else { u64::from(b) * 1000 };
        let mut arcs = vec![a, second];
        arcs.extend(rest.into_iter().map(|r| r >> (r % 64)));
        Oid::new(&arcs).expect("valid arcs")
    })
}

pub fn leaf() -> impl Strategy<Value = Asn1Value> {
    prop_oneof![
        any::<bool>().prop_map(Asn1Value::boolean),
        any::<i64>().prop_map(Asn1Value::integer),
        prop::collection::vec(any::<u8>(), 1..40)
            .prop_map(|b| Asn1Value::integer(BigInt::from_signed_bytes_be(&b))),
        Just(Asn1Value::null()),
        oid_strategy().prop_map(|o| Asn1Value::oid(&o)),
        prop::collection::vec(any::<u8>(), 0..200).prop_map(Asn1Value::octet_string),
        prop::collection::vec(any::<u8>(), 0..50).prop_map(|b| Asn1Value::bit_string(&b)),
        "\\PC{0,20}".prop_map(|s| Asn1Value::utf8_string(&s)),
        "[A-Za-z0-9 '()+,./:=?-]{0,20}".prop_map(|s| Asn1Value::printable_string(&s)),
        "[\\x00-\\x7f]{0,20}".prop_map(|s| Asn1Value::ia5_string(&s)),
        (0i64..4_102_444_800).prop_map(|t| Asn1Value::time(&Utc.timestamp_opt(t, 0).unwrap())),
        (0u32..40, prop::collection::vec(any::<u8>(), 0..10)).prop_map(|(n, c)| Asn1Value::implicit(n, c)),
    ]
}

pub fn tree() -> impl Strategy<Value = Asn1Value> {
    leaf().prop_recursive(6, 128, 8, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..8).prop_map(Asn1Value::sequence),
            prop::collection::vec(inner.clone(), 0..8).prop_map(Asn1Value::set),
            (0u32..200, inner).prop_map(|(n, v)| Asn1Value::explicit(n, v)),
        ]
    })
}

#[derive(Clone, Copy)]
enum Mutation {
    PadLength,
    Indefinite,
    PadInteger,
}

fn length_octets(n: usize, pad: bool) -> Vec<u8> {
    let mut body: Vec<u8> = n.to_be_bytes().iter().copied().skip_while(|b| *b == 0).collect();
    if n < 0x80 && !pad {
        return vec![n as u8];
    }
    if pad || body.is_empty() {
        body.insert(0, 0);
    }
    let mut out = vec![0x80 | body.len() as u8];
    out.extend(body);
    out
}

/// Re-serializes a decoded tree, applying `m` to the node at `target` and
/// recomputing every enclosing length.
fn emit(v: &Asn1Value, der: &[u8], target: usize, m: Mutation) -> Vec<u8> {
    let hit = v.span.offset == target;
    let mut content = match &v.content {
        Content::Primitive(bytes) => bytes.clone(),
        Content::Constructed(children) => children.iter().flat_map(|c| emit(c, der, target, m)).collect(),
    };
    let mut out = vec![der[v.span.offset]];
    match m {
        Mutation::PadLength if hit => out.extend(length_octets(content.len(), true)),
        Mutation::Indefinite if hit => {
            out.push(0x80);
            content.extend([0, 0]);
        }
        Mutation::PadInteger if hit => {
            content.insert(0, 0);
            out.extend(length_octets(content.len(), false));
        }
        _ => out.extend(length_octets(content.len(), false)),
    }
    out.extend(content);
    out
}

/// Mutations of one valid certificate that no DER decoder may accept.
pub fn mutation_corpus(der: &[u8]) -> Vec<(String, Vec<u8>, DecodeErrorKind)> {
    let mut out = Vec::new();
    for cut in 0..der.len() {
        out.push((format!("truncated to {cut}"), der[..cut].to_vec(), DecodeErrorKind::Truncated));
    }
    let tree = decode(der).unwrap();
    assert_eq!(emit(&tree, der, usize::MAX, Mutation::PadLength), der);
    let mut stack = vec![&tree];
    while let Some(v) = stack.pop() {
        let at = v.span.offset;
        out.push((format!("padded length at {at}"), emit(&tree, der, at, Mutation::PadLength), DecodeErrorKind::NonMinimalLength));
        if v.tag.constructed {
            out.push((format!("indefinite length at {at}"), emit(&tree, der, at, Mutation::Indefinite), DecodeErrorKind::IndefiniteLength));
        }
        if v.tag == Tag::INTEGER {
            out.push((format!("redundant zero INTEGER at {at}"), emit(&tree, der, at, Mutation::PadInteger), DecodeErrorKind::NonMinimalInteger));
        }
        if let Some(children) = v.children() {
            stack.extend(children);
        }
    }
    out
}
