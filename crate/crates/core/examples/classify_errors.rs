// Maps parser error strings to categories with the built-in table.
//
// cargo run --example classify_errors -- <parser-id> <error string>

use parseval::taxonomy::ClassificationTable;

const SAMPLES: [(&str, &str); 7] = [
    ("go", "x509: malformed UTCTime"),
    ("go", "x509: unsupported elliptic curve"),
    ("go", "x509: invalid RSA public exponent"),
    ("go", "x509: cannot parse URI \"http://[::1\": missing ']'"),
    ("mbedtls", "X509 - Unavailable feature, e.g. RSA hashing/encryption combination"),
    ("gnutls", "Duplicate extension in X.509 certificate."),
    ("wolfssl", "ASN parsing error, invalid input"),
];

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let table = ClassificationTable::builtin();
    println!("table version {}", table.version());
    for (parser, error) in SAMPLES {
        println!("{:<20} {parser:<8} {error}", table.classify(parser, error));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [parser, error @ ..] if !error.is_empty() => {
            println!("{}", ClassificationTable::builtin().classify(parser, &error.join(" ")));
            Ok(())
        }
        _ => run_example(),
    }
}
