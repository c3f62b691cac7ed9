// Speaks the adapter line protocol with the built-in parser over
// in-memory pipes.
//
// `parseval adapter --profile lenient` serves the same protocol on
// stdin/stdout for use as `exec:` parser.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use parseval::certgen::{self, DefectId};
use parseval::harness::protocol::{parse_handshake, parse_response};
use parseval::harness::serve_adapter;
use parseval::x509::ValidationProfile;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let input: String = [DefectId::None, DefectId::Truncated, DefectId::InvalidVersion]
        .iter()
        .map(|d| STANDARD.encode(certgen::generate_one(*d, 1, 0).der) + "\n")
        .chain(["not base64!\n".to_string()])
        .collect();
    let mut output = Vec::new();
    serve_adapter("parseval-strict", &ValidationProfile::strict(), input.as_bytes(), &mut output)?;

    let text = String::from_utf8(output)?;
    let mut lines = text.lines();
    let hs = parse_handshake(lines.next().ok_or("no handshake")?)?;
    println!("adapter {} {}", hs.parser_id, hs.version);
    for line in lines {
        println!("{:?}", parse_response(line)?);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
