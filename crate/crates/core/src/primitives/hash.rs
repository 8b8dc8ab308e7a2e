use ark_bls12_381::{g1, G1Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::AffineRepr;
use ark_ff::field_hashers::DefaultFieldHasher;
use hmac::{Hmac, Mac};
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::group::{G1Point, GtElement};

pub const DIGEST_LEN: usize = 32;

const TAG_H0: &[u8] = b"privsnp/h0/v1";
const TAG_H2: &[u8] = b"privsnp/h2/v1";
const DST_H1: &[u8] = b"PRIVSNP-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";

type G1Hasher = MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;

/// 256-bit PRF key (`K` when shared by hospitals and clients, `r_i` for the
/// per-index randomization layer).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrfKey([u8; 32]);

impl PrfKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl core::fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("PrfKey(..)")
    }
}

/// HMAC-SHA256.
pub fn prf(key: &PrfKey, data: &[u8]) -> [u8; 32] {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(&key.0).expect("hmac accepts any key length");
    mac.update(data);
    mac.finalize().into_bytes().into()
}

/// PRF with the key schedule computed once; equal to [`prf`] pointwise.
#[derive(Clone)]
pub struct KeyedPrf(Hmac<Sha256>);

impl KeyedPrf {
    pub fn new(key: &PrfKey) -> Self {
        Self(<Hmac<Sha256> as Mac>::new_from_slice(&key.0).expect("hmac accepts any key length"))
    }

    pub fn eval(&self, data: &[u8]) -> [u8; 32] {
        self.0.clone().chain_update(data).finalize().into_bytes().into()
    }
}

/// SHA-256 over `tag || len(tag) || parts`, each part length-prefixed so
/// that concatenation boundaries cannot shift.
pub fn tagged_hash(tag: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((tag.len() as u32).to_le_bytes());
    h.update(tag);
    for p in parts {
        h.update((p.len() as u32).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

pub fn h0(a: &[u8], b: &[u8]) -> [u8; 32] {
    tagged_hash(TAG_H0, &[a, b])
}

/// Hash to G1 (SSWU + isogeny, random-oracle variant).
pub fn h1(v: &[u8]) -> G1Point {
    hash_to_g1(DST_H1, v)
}

pub(crate) fn hash_to_g1(dst: &[u8], v: &[u8]) -> G1Point {
    let hasher = G1Hasher::new(dst).expect("static DST is valid");
    let mut point = hasher.hash(v).expect("hash-to-curve is total");
    let mut ctr = 0u32;
    // Probability of hitting the identity is ~2^-255; rehash if it happens.
    while point.is_zero() {
        ctr += 1;
        let mut buf = alloc::vec::Vec::from(v);
        buf.extend_from_slice(&ctr.to_le_bytes());
        point = hasher.hash(&buf).expect("hash-to-curve is total");
    }
    G1Point::from_affine(point)
}

/// `H2(tau, x)` over the canonical encoding of the target-group element.
pub fn h2(tau: &[u8], x: &GtElement) -> [u8; 32] {
    tagged_hash(TAG_H2, &[tau, &x.to_bytes()])
}

/// Derives a 32-byte cipher key from a target-group element.
pub fn kdf(x: &GtElement) -> [u8; 32] {
    tagged_hash(b"privsnp/kdf-gt/v1", &[&x.to_bytes()])
}
