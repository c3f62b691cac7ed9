// Builds an ASN.1 tree, encodes it as DER, decodes it back and shows the
// decoder rejecting non-canonical encodings.

use parseval::der::{decode, encode, Asn1Value, Oid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = Asn1Value::sequence(vec![
        Asn1Value::integer(-129),
        Asn1Value::oid(&"1.2.840.113549.1.1.11".parse::<Oid>()?),
        Asn1Value::boolean(true),
        Asn1Value::set(vec![Asn1Value::printable_string("b"), Asn1Value::printable_string("a")]),
        Asn1Value::explicit(0, Asn1Value::utf8_string("hello")),
    ]);
    let der = encode(&tree)?;
    println!("encoded {} bytes: {}", der.len(), hex::encode(&der));
    let back = decode(&der)?;
    assert_eq!(back, decode(&encode(&back)?)?);
    println!("round trip ok");

    let bad: [(&str, &[u8]); 5] = [
        ("indefinite length", &[0x30, 0x80, 0x05, 0x00, 0x00, 0x00]),
        ("long-form length 2", &[0x04, 0x81, 0x02, 0xaa, 0xbb]),
        ("INTEGER 0x00 0x7f", &[0x02, 0x02, 0x00, 0x7f]),
        ("BOOLEAN 0x01", &[0x01, 0x01, 0x01]),
        ("trailing byte", &[0x05, 0x00, 0x00]),
    ];
    for (label, bytes) in bad {
        let err = decode(bytes).expect_err(label);
        println!("{label:<20} -> {err}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
