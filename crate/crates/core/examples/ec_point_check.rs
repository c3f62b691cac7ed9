// Point validation on a toy curve and on P-256.

use num_bigint::BigUint;
use parseval::x509::curves::{CurveParams, P256};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = |v: u32| BigUint::from(v);
    let toy = CurveParams::new("toy17", n(17), n(2), n(2), n(5), n(1), n(19))?;
    let mut points = Vec::new();
    for x in 0..17u32 {
        for y in 0..17u32 {
            if toy.check_point(&toy.encode_point(&n(x), &n(y))).is_ok() {
                points.push((x, y));
            }
        }
    }
    println!("y^2 = x^3 + 2x + 2 over F_17 has {} affine points: {points:?}", points.len());

    let g = P256.generator_point();
    println!("P-256 generator: {:?}", P256.check_point(&g).map(|_| "on curve"));
    let gy1 = P256.encode_point(&P256.gx, &((&P256.gy + 1u8) % &P256.p));
    println!("P-256 generator with y+1: {:?}", P256.check_point(&gy1).err());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
