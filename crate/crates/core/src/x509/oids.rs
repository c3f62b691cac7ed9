//! Object identifier arcs used by the parser and the generator.

pub const RSA_ENCRYPTION: &[u64] = &[1, 2, 840, 113549, 1, 1, 1];
pub const MD5_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 4];
pub const SHA1_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 5];
pub const RSASSA_PSS: &[u64] = &[1, 2, 840, 113549, 1, 1, 10];
pub const SHA256_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 11];
pub const SHA384_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 12];
pub const SHA512_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 13];
pub const SHA224_WITH_RSA: &[u64] = &[1, 2, 840, 113549, 1, 1, 14];
/// Prefix shared by the PKCS #1 algorithm identifiers.
pub const PKCS1: &[u64] = &[1, 2, 840, 113549, 1, 1];

pub const EC_PUBLIC_KEY: &[u64] = &[1, 2, 840, 10045, 2, 1];
pub const ECDSA_WITH_SHA1: &[u64] = &[1, 2, 840, 10045, 4, 1];
pub const ECDSA_WITH_SHA224: &[u64] = &[1, 2, 840, 10045, 4, 3, 1];
pub const ECDSA_WITH_SHA256: &[u64] = &[1, 2, 840, 10045, 4, 3, 2];
pub const ECDSA_WITH_SHA384: &[u64] = &[1, 2, 840, 10045, 4, 3, 3];
pub const ECDSA_WITH_SHA512: &[u64] = &[1, 2, 840, 10045, 4, 3, 4];
pub const DSA_WITH_SHA1: &[u64] = &[1, 2, 840, 10040, 4, 3];
pub const DSA_WITH_SHA256: &[u64] = &[2, 16, 840, 1, 101, 3, 4, 3, 2];
pub const ED25519: &[u64] = &[1, 3, 101, 112];
pub const ED448: &[u64] = &[1, 3, 101, 113];

pub const SECP256R1: &[u64] = &[1, 2, 840, 10045, 3, 1, 7];
pub const SECP384R1: &[u64] = &[1, 3, 132, 0, 34];
pub const SECP521R1: &[u64] = &[1, 3, 132, 0, 35];
pub const SECP256K1: &[u64] = &[1, 3, 132, 0, 10];

pub const COMMON_NAME: &[u64] = &[2, 5, 4, 3];
pub const COUNTRY: &[u64] = &[2, 5, 4, 6];
pub const ORGANIZATION: &[u64] = &[2, 5, 4, 10];
pub const ORGANIZATIONAL_UNIT: &[u64] = &[2, 5, 4, 11];

pub const SUBJECT_DIRECTORY_ATTRIBUTES: &[u64] = &[2, 5, 29, 9];
pub const SUBJECT_KEY_IDENTIFIER: &[u64] = &[2, 5, 29, 14];
pub const KEY_USAGE: &[u64] = &[2, 5, 29, 15];
pub const SUBJECT_ALT_NAME: &[u64] = &[2, 5, 29, 17];
pub const ISSUER_ALT_NAME: &[u64] = &[2, 5, 29, 18];
pub const BASIC_CONSTRAINTS: &[u64] = &[2, 5, 29, 19];
pub const NAME_CONSTRAINTS: &[u64] = &[2, 5, 29, 30];
pub const CRL_DISTRIBUTION_POINTS: &[u64] = &[2, 5, 29, 31];
pub const CERTIFICATE_POLICIES: &[u64] = &[2, 5, 29, 32];
pub const POLICY_MAPPINGS: &[u64] = &[2, 5, 29, 33];
pub const AUTHORITY_KEY_IDENTIFIER: &[u64] = &[2, 5, 29, 35];
pub const POLICY_CONSTRAINTS: &[u64] = &[2, 5, 29, 36];
pub const EXT_KEY_USAGE: &[u64] = &[2, 5, 29, 37];
pub const INHIBIT_ANY_POLICY: &[u64] = &[2, 5, 29, 54];
pub const AUTHORITY_INFO_ACCESS: &[u64] = &[1, 3, 6, 1, 5, 5, 7, 1, 1];
pub const SUBJECT_INFO_ACCESS: &[u64] = &[1, 3, 6, 1, 5, 5, 7, 1, 11];
pub const SCT_LIST: &[u64] = &[1, 3, 6, 1, 4, 1, 11129, 2, 4, 2];

/// Extensions the parser recognizes; anything else marked critical is
/// unsupported.
pub const KNOWN_EXTENSIONS: &[&[u64]] = &[
    SUBJECT_DIRECTORY_ATTRIBUTES,
    SUBJECT_KEY_IDENTIFIER,
    KEY_USAGE,
    SUBJECT_ALT_NAME,
    ISSUER_ALT_NAME,
    BASIC_CONSTRAINTS,
    NAME_CONSTRAINTS,
    CRL_DISTRIBUTION_POINTS,
    CERTIFICATE_POLICIES,
    POLICY_MAPPINGS,
    AUTHORITY_KEY_IDENTIFIER,
    POLICY_CONSTRAINTS,
    EXT_KEY_USAGE,
    INHIBIT_ANY_POLICY,
    AUTHORITY_INFO_ACCESS,
    SUBJECT_INFO_ACCESS,
    SCT_LIST,
];

/// Signature algorithms the STRICT profile accepts.
pub const SUPPORTED_SIGNATURE_ALGORITHMS: &[&[u64]] = &[
    MD5_WITH_RSA,
    SHA1_WITH_RSA,
    RSASSA_PSS,
    SHA224_WITH_RSA,
    SHA256_WITH_RSA,
    SHA384_WITH_RSA,
    SHA512_WITH_RSA,
    ECDSA_WITH_SHA1,
    ECDSA_WITH_SHA224,
    ECDSA_WITH_SHA256,
    ECDSA_WITH_SHA384,
    ECDSA_WITH_SHA512,
    DSA_WITH_SHA1,
    DSA_WITH_SHA256,
    ED25519,
    ED448,
];
