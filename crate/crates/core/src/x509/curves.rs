//! Short-Weierstrass curve parameters and point validation.

use std::fmt;
use std::sync::LazyLock;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::der::Oid;

use super::oids;

/// Named curves the reference parser knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveId {
    P256,
    P384,
    P521,
}

impl CurveId {
    pub const ALL: [CurveId; 3] = [CurveId::P256, CurveId::P384, CurveId::P521];

    pub fn from_oid(oid: &Oid) -> Option<Self> {
        match oid.arcs() {
            a if a == oids::SECP256R1 => Some(CurveId::P256),
            a if a == oids::SECP384R1 => Some(CurveId::P384),
            a if a == oids::SECP521R1 => Some(CurveId::P521),
            _ => None,
        }
    }

    pub fn oid(&self) -> Oid {
        Oid::from_static(match self {
            CurveId::P256 => oids::SECP256R1,
            CurveId::P384 => oids::SECP384R1,
            CurveId::P521 => oids::SECP521R1,
        })
    }

    pub fn params(&self) -> &'static CurveParams {
        match self {
            CurveId::P256 => &P256,
            CurveId::P384 => &P384,
            CurveId::P521 => &P521,
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveId::P256 => "P-256",
            CurveId::P384 => "P-384",
            CurveId::P521 => "P-521",
        })
    }
}

/// Curve `y^2 = x^3 + ax + b` over the prime field of order `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveParams {
    pub name: String,
    pub p: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub gx: BigUint,
    pub gy: BigUint,
    pub n: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("coefficient or generator coordinate not reduced modulo p")]
    Unreduced,
    #[error("singular curve: 4a^3 + 27b^2 = 0 mod p")]
    Singular,
    #[error("generator is not on the curve")]
    GeneratorOffCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PointError {
    #[error("empty point encoding")]
    Empty,
    #[error("point is not in uncompressed form (leading byte {0:#04x})")]
    NotUncompressed(u8),
    #[error("uncompressed point has {found} coordinate bytes, expected {expected}")]
    BadLength { found: usize, expected: usize },
    #[error("point coordinate is not below the field prime")]
    CoordinateOutOfRange,
    #[error("point is not on the curve")]
    NotOnCurve,
}

impl CurveParams {
    /// Builds and validates a curve: coefficients reduced, non-singular,
    /// generator on the curve.
    pub fn new(
        name: &str,
        p: BigUint,
        a: BigUint,
        b: BigUint,
        gx: BigUint,
        gy: BigUint,
        n: BigUint,
    ) -> Result<Self, CurveError> {
        let curve = CurveParams {
            name: name.to_string(),
            p,
            a,
            b,
            gx,
            gy,
            n,
        };
        if [&curve.a, &curve.b, &curve.gx, &curve.gy]
            .iter()
            .any(|v| **v >= curve.p)
        {
            return Err(CurveError::Unreduced);
        }
        if curve.discriminant().is_zero() {
            return Err(CurveError::Singular);
        }
        if !curve.contains(&curve.gx, &curve.gy) {
            return Err(CurveError::GeneratorOffCurve);
        }
        Ok(curve)
    }

    fn from_hex(name: &str, hex: [&str; 6]) -> Self {
        let [p, a, b, gx, gy, n] = hex.map(|h| BigUint::parse_bytes(h.as_bytes(), 16).unwrap());
        CurveParams::new(name, p, a, b, gx, gy, n).expect("built-in curve parameters are valid")
    }

    /// `4a^3 + 27b^2 mod p`.
    pub fn discriminant(&self) -> BigUint {
        let p = &self.p;
        let four_a3 = BigUint::from(4u8) * self.a.modpow(&BigUint::from(3u8), p);
        let b2 = BigUint::from(27u8) * (&self.b * &self.b);
        (four_a3 + b2) % p
    }

    /// Bytes per coordinate in an uncompressed point.
    pub fn coordinate_len(&self) -> usize {
        (self.p.bits() as usize).div_ceil(8)
    }

    /// Whether `(x, y)` satisfies the curve equation. Coordinates are reduced
    /// first; use [`CurveParams::check_point`] for range checks.
    pub fn contains(&self, x: &BigUint, y: &BigUint) -> bool {
        let p = &self.p;
        let lhs = (y * y) % p;
        let rhs = (x * x * x + &self.a * x + &self.b) % p;
        lhs == rhs
    }

    /// Validates an encoded point: `04 || X || Y`, each coordinate exactly
    /// `coordinate_len` bytes and below `p`, and on the curve.
    pub fn check_point(&self, encoded: &[u8]) -> Result<(BigUint, BigUint), PointError> {
        let (&form, coords) = encoded.split_first().ok_or(PointError::Empty)?;
        if form != 0x04 {
            return Err(PointError::NotUncompressed(form));
        }
        let len = self.coordinate_len();
        if coords.len() != 2 * len {
            return Err(PointError::BadLength {
                found: coords.len(),
                expected: 2 * len,
            });
        }
        let x = BigUint::from_bytes_be(&coords[..len]);
        let y = BigUint::from_bytes_be(&coords[len..]);
        if x >= self.p || y >= self.p {
            return Err(PointError::CoordinateOutOfRange);
        }
        if !self.contains(&x, &y) {
            return Err(PointError::NotOnCurve);
        }
        Ok((x, y))
    }

    /// Uncompressed encoding of `(x, y)`, left-padded to the coordinate
    /// length.
    pub fn encode_point(&self, x: &BigUint, y: &BigUint) -> Vec<u8> {
        let len = self.coordinate_len();
        let mut out = vec![0x04];
        for c in [x, y] {
            let bytes = c.to_bytes_be();
            out.extend(std::iter::repeat_n(0u8, len.saturating_sub(bytes.len())));
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn generator_point(&self) -> Vec<u8> {
        self.encode_point(&self.gx, &self.gy)
    }

    /// A `y` with `(x, y)` on the curve, if one exists. Requires
    /// `p = 3 (mod 4)`, which holds for all named curves here.
    pub fn lift_x(&self, x: &BigUint) -> Option<BigUint> {
        let p = &self.p;
        if &self.p % 4u8 != BigUint::from(3u8) {
            return None;
        }
        let x = x % p;
        let rhs = (&x * &x * &x + &self.a * &x + &self.b) % p;
        let y = rhs.modpow(&((p + 1u8) >> 2), p);
        ((&y * &y) % p == rhs).then_some(y)
    }
}

pub static P256: LazyLock<CurveParams> = LazyLock::new(|| {
    CurveParams::from_hex(
        "P-256",
        [
            "ffffffff00000001000000000000000000000000ffffffffffffffffffffffff",
            "ffffffff00000001000000000000000000000000fffffffffffffffffffffffc",
            "5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b",
            "6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296",
            "4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5",
            "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551",
        ],
    )
});

pub static P384: LazyLock<CurveParams> = LazyLock::new(|| {
    CurveParams::from_hex(
        "P-384",
        [
            "fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffeffffffff0000000000000000ffffffff",
            "fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffeffffffff0000000000000000fffffffc",
            "b3312fa7e23ee7e4988e056be3f82d19181d9c6efe8141120314088f5013875ac656398d8a2ed19d2a85c8edd3ec2aef",
            "aa87ca22be8b05378eb1c71ef320ad746e1d3b628ba79b9859f741e082542a385502f25dbf55296c3a545e3872760ab7",
            "3617de4a96262c6f5d9e98bf9292dc29f8f41dbd289a147ce9da3113b5f0b8c00a60b1ce1d7e819d7a431d7c90ea0e5f",
            "ffffffffffffffffffffffffffffffffffffffffffffffffc7634d81f4372ddf581a0db248b0a77aecec196accc52973",
        ],
    )
});

pub static P521: LazyLock<CurveParams> = LazyLock::new(|| {
    CurveParams::from_hex(
        "P-521",
        [
            "01ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff",
            "01fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffc",
            "0051953eb9618e1c9a1f929a21a0b68540eea2da725b99b315f3b8b489918ef109e156193951ec7e937b1652c0bd3bb1bf073573df883d2c34f1ef451fd46b503f00",
            "00c6858e06b70404e9cd9e3ecb662395b4429c648139053fb521f828af606b4d3dbaa14b5e77efe75928fe1dc127a2ffa8de3348b3c1856a429bf97e7e31c2e5bd66",
            "011839296a789a3bc0045c8a5fb42c7d1bd998f54449579b446817afbd17273e662c97ee72995ef42640c550b9013fad0761353c7086a272c24088be94769fd16650",
            "01fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffa51868783bf2f966b7fcc0148f709a5d03bb5c9b8899c47aebb6fb71e91386409",
        ],
    )
});
