//! Ciphertext-policy ABE restricted to AND-of-attributes policies.
//!
//! This is the tree construction of Bethencourt, Sahai and Waters with the
//! single root gate fixed to n-of-n (so the secret is shared additively)
//! and moved to a type-3 pairing: key components live in G1, ciphertext
//! components in G2, and the attribute hash `H(a)` in G1 on both sides.
//!
//! Setup: `pk = (h = g2^β, Y = e(g1,g2)^α)`, `mk = (β, g1^α)`.
//! Encrypt `M` under `{a_1..a_n}` with `s = Σ s_j`:
//! `C~ = M·Y^s`, `C = h^s`, `C_j = g2^{s_j}`, `C'_j = H(a_j)^{s_j}`.
//! KeyGen for a set S with per-key randomizer `r` and per-attribute `r_a`:
//! `D = g1^{(α+r)/β}`, `D_a = g1^r·H(a)^{r_a}`, `D'_a = g2^{r_a}`.
//! Decrypt: `e(D,C)^{-1} · Π e(D_j,C_j)·e(C'_j,D'_j)^{-1} = Y^{-s}`.
//!
//! Ciphertexts carry a hash commitment to `M` so that keys from another
//! authority (or spliced from two keys) fail explicitly instead of
//! yielding a random group element.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use ark_bls12_381::Fr;
use ark_ff::{UniformRand, Zero};
use rand_core::{CryptoRng, RngCore};

use crate::encoding::{Reader, Writer};
use crate::error::{Error, Result};
use crate::primitives::{tagged_hash, G1Point, G2Point, GroupParams, GtElement, Scalar};

const VERSION: u8 = 1;
const DST_ATTR: &[u8] = b"PRIVSNP-V01-CS02-ABE-ATTR-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";

/// Attributes are the 32-byte strings produced by `h2`.
pub type Attribute = [u8; 32];

fn attribute_point(a: &Attribute) -> G1Point {
    crate::primitives::hash_to_g1(DST_ATTR, a)
}

fn commitment(m: &GtElement) -> [u8; 32] {
    tagged_hash(b"privsnp/abe-check/v1", &[&m.to_bytes()])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbePublicKey {
    g1: G1Point,
    g2: G2Point,
    h: G2Point,
    y: GtElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbeMasterKey {
    beta: Scalar,
    g1_alpha: G1Point,
    g1: G1Point,
    g2: G2Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbeKeys {
    pub pk: AbePublicKey,
    pub mk: AbeMasterKey,
}

/// Non-empty conjunction of attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AndPolicy(BTreeSet<Attribute>);

impl AndPolicy {
    pub fn new<I: IntoIterator<Item = Attribute>>(attrs: I) -> Result<Self> {
        let set: BTreeSet<_> = attrs.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyInput("access policy"));
        }
        Ok(Self(set))
    }

    pub fn attributes(&self) -> &BTreeSet<Attribute> {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct CtComponent {
    c: G2Point,
    c_prime: G1Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbeCiphertext {
    c_tilde: GtElement,
    c: G2Point,
    check: [u8; 32],
    components: BTreeMap<Attribute, CtComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct KeyComponent {
    d: G1Point,
    d_prime: G2Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbeSecretKey {
    d: G1Point,
    components: BTreeMap<Attribute, KeyComponent>,
}

pub fn abe_setup<R: RngCore + CryptoRng>(params: &GroupParams, rng: &mut R) -> AbeKeys {
    let alpha = Scalar::random(rng);
    let beta = Scalar::random(rng);
    let pk = AbePublicKey {
        g1: params.g1,
        g2: params.g2,
        h: params.g2.mul(&beta),
        y: params.pairing_generator().pow(&alpha),
    };
    let mk = AbeMasterKey { beta, g1_alpha: params.g1.mul(&alpha), g1: params.g1, g2: params.g2 };
    AbeKeys { pk, mk }
}

pub fn abe_encrypt<R: RngCore + CryptoRng>(
    pk: &AbePublicKey,
    message: &GtElement,
    policy: &AndPolicy,
    rng: &mut R,
) -> Result<AbeCiphertext> {
    let s = Scalar::random(rng);
    let n = policy.0.len();
    let mut remaining = s.0;
    let mut components = BTreeMap::new();
    for (i, attr) in policy.0.iter().enumerate() {
        let share = if i + 1 == n { remaining } else { Fr::rand(rng) };
        remaining -= share;
        // A zero share is legal algebraically; it maps to the identity point.
        let c = pk.g2.mul_fr(&share);
        let c_prime = attribute_point(attr).mul_fr(&share);
        components.insert(*attr, CtComponent { c, c_prime });
    }
    debug_assert!(remaining.is_zero());
    Ok(AbeCiphertext {
        c_tilde: message.mul(&pk.y.pow(&s)),
        c: pk.h.mul(&s),
        check: commitment(message),
        components,
    })
}

pub fn abe_keygen<R: RngCore + CryptoRng>(
    mk: &AbeMasterKey,
    attrs: &BTreeSet<Attribute>,
    rng: &mut R,
) -> Result<AbeSecretKey> {
    if attrs.is_empty() {
        return Err(Error::EmptyInput("attribute set"));
    }
    let r = Scalar::random(rng);
    let g1_r = mk.g1.mul(&r);
    let d = mk.g1_alpha.add(&g1_r).mul(&mk.beta.inverse()?);
    let components = attrs
        .iter()
        .map(|a| {
            let r_a = Scalar::random(rng);
            let d = g1_r.add(&attribute_point(a).mul(&r_a));
            (*a, KeyComponent { d, d_prime: mk.g2.mul(&r_a) })
        })
        .collect();
    Ok(AbeSecretKey { d, components })
}

pub fn abe_decrypt(_pk: &AbePublicKey, sk: &AbeSecretKey, ct: &AbeCiphertext) -> Result<GtElement> {
    let mut lhs = Vec::with_capacity(2 * ct.components.len() + 1);
    let mut rhs = Vec::with_capacity(2 * ct.components.len() + 1);
    lhs.push(sk.d.neg());
    rhs.push(ct.c);
    for (attr, comp) in &ct.components {
        let key = sk.components.get(attr).ok_or(Error::PolicyNotSatisfied)?;
        lhs.push(key.d);
        rhs.push(comp.c);
        lhs.push(comp.c_prime.neg());
        rhs.push(key.d_prime);
    }
    let blind = crate::primitives::multi_pair(&lhs, &rhs);
    let message = ct.c_tilde.mul(&blind);
    if commitment(&message) != ct.check {
        return Err(Error::WrongAuthority);
    }
    Ok(message)
}

impl AbeCiphertext {
    pub fn policy_attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.components.keys()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(VERSION).u8(b'C').u32(self.components.len() as u32);
        w.bytes(&self.c_tilde.to_bytes()).bytes(&self.c.to_bytes()).bytes(&self.check);
        for (attr, comp) in &self.components {
            w.bytes(attr).bytes(&comp.c.to_bytes()).bytes(&comp.c_prime.to_bytes());
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        expect_header(&mut r, b'C')?;
        let n = r.u32()? as usize;
        if n == 0 {
            return Err(Error::Decode("ciphertext with empty policy"));
        }
        let c_tilde = GtElement::from_bytes(r.bytes()?)?;
        let c = G2Point::from_bytes(r.bytes()?)?;
        let check = fixed32(r.bytes()?)?;
        let mut components = BTreeMap::new();
        for _ in 0..n {
            let attr = fixed32(r.bytes()?)?;
            let comp = CtComponent { c: G2Point::from_bytes(r.bytes()?)?, c_prime: G1Point::from_bytes(r.bytes()?)? };
            if components.insert(attr, comp).is_some() {
                return Err(Error::Decode("duplicate policy attribute"));
            }
        }
        r.finish()?;
        Ok(Self { c_tilde, c, check, components })
    }
}

impl AbeSecretKey {
    pub fn attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.components.keys()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(VERSION).u8(b'K').u32(self.components.len() as u32).bytes(&self.d.to_bytes());
        for (attr, comp) in &self.components {
            w.bytes(attr).bytes(&comp.d.to_bytes()).bytes(&comp.d_prime.to_bytes());
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        expect_header(&mut r, b'K')?;
        let n = r.u32()? as usize;
        let d = G1Point::from_bytes(r.bytes()?)?;
        let mut components = BTreeMap::new();
        for _ in 0..n {
            let attr = fixed32(r.bytes()?)?;
            let comp = KeyComponent { d: G1Point::from_bytes(r.bytes()?)?, d_prime: G2Point::from_bytes(r.bytes()?)? };
            components.insert(attr, comp);
        }
        r.finish()?;
        Ok(Self { d, components })
    }
}

impl AbePublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(VERSION).u8(b'P');
        w.bytes(&self.g1.to_bytes()).bytes(&self.g2.to_bytes()).bytes(&self.h.to_bytes()).bytes(&self.y.to_bytes());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        expect_header(&mut r, b'P')?;
        let pk = Self {
            g1: G1Point::from_bytes(r.bytes()?)?,
            g2: G2Point::from_bytes(r.bytes()?)?,
            h: G2Point::from_bytes(r.bytes()?)?,
            y: GtElement::from_bytes(r.bytes()?)?,
        };
        r.finish()?;
        Ok(pk)
    }
}

impl AbeMasterKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(VERSION).u8(b'M');
        w.bytes(&self.beta.to_bytes()).bytes(&self.g1_alpha.to_bytes()).bytes(&self.g1.to_bytes()).bytes(&self.g2.to_bytes());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        expect_header(&mut r, b'M')?;
        let mk = Self {
            beta: Scalar::from_bytes(r.bytes()?)?,
            g1_alpha: G1Point::from_bytes(r.bytes()?)?,
            g1: G1Point::from_bytes(r.bytes()?)?,
            g2: G2Point::from_bytes(r.bytes()?)?,
        };
        r.finish()?;
        Ok(mk)
    }
}

fn expect_header(r: &mut Reader<'_>, kind: u8) -> Result<()> {
    if r.u8()? != VERSION {
        return Err(Error::Decode("unsupported ABE encoding version"));
    }
    if r.u8()? != kind {
        return Err(Error::Decode("unexpected ABE object kind"));
    }
    Ok(())
}

fn fixed32(b: &[u8]) -> Result<[u8; 32]> {
    b.try_into().map_err(|_| Error::Decode("attribute must be 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn attr(i: u8) -> Attribute {
        [i; 32]
    }

    fn set(ids: &[u8]) -> BTreeSet<Attribute> {
        ids.iter().map(|&i| attr(i)).collect()
    }

    fn fixture() -> (ChaCha20Rng, AbeKeys) {
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let keys = abe_setup(&GroupParams::bls12_381(), &mut rng);
        (rng, keys)
    }

    #[test]
    fn singleton_policy_round_trip() {
        let (mut rng, keys) = fixture();
        let m = GtElement::random(&mut rng);
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new([attr(1)]).unwrap(), &mut rng).unwrap();
        let sk = abe_keygen(&keys.mk, &set(&[1]), &mut rng).unwrap();
        assert_eq!(abe_decrypt(&keys.pk, &sk, &ct).unwrap(), m);
    }

    #[test]
    fn missing_attribute_is_policy_miss_and_superset_succeeds() {
        let (mut rng, keys) = fixture();
        let m = GtElement::random(&mut rng);
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(set(&[1, 2, 3])).unwrap(), &mut rng).unwrap();
        let short = abe_keygen(&keys.mk, &set(&[1, 2]), &mut rng).unwrap();
        assert_eq!(abe_decrypt(&keys.pk, &short, &ct), Err(Error::PolicyNotSatisfied));

        let ct2 = abe_encrypt(&keys.pk, &m, &AndPolicy::new(set(&[1, 2])).unwrap(), &mut rng).unwrap();
        let wide = abe_keygen(&keys.mk, &set(&[1, 2, 3]), &mut rng).unwrap();
        assert_eq!(abe_decrypt(&keys.pk, &wide, &ct2).unwrap(), m);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let (mut rng, keys) = fixture();
        assert_eq!(AndPolicy::new([]), Err(Error::EmptyInput("access policy")));
        assert!(abe_keygen(&keys.mk, &BTreeSet::new(), &mut rng).is_err());
    }

    #[test]
    fn independent_authorities_do_not_interoperate() {
        let (mut rng, keys) = fixture();
        let other = abe_setup(&GroupParams::bls12_381(), &mut rng);
        let m = GtElement::random(&mut rng);
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(set(&[4])).unwrap(), &mut rng).unwrap();
        let foreign = abe_keygen(&other.mk, &set(&[4]), &mut rng).unwrap();
        assert_eq!(abe_decrypt(&keys.pk, &foreign, &ct), Err(Error::WrongAuthority));
    }

    #[test]
    fn keygen_is_randomized() {
        let (mut rng, keys) = fixture();
        let m = GtElement::random(&mut rng);
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(set(&[1, 2])).unwrap(), &mut rng).unwrap();
        let a = abe_keygen(&keys.mk, &set(&[1, 2]), &mut rng).unwrap();
        let b = abe_keygen(&keys.mk, &set(&[1, 2]), &mut rng).unwrap();
        assert_ne!(a.to_bytes(), b.to_bytes());
        assert_eq!(abe_decrypt(&keys.pk, &a, &ct).unwrap(), m);
        assert_eq!(abe_decrypt(&keys.pk, &b, &ct).unwrap(), m);
    }

    #[test]
    fn spliced_keys_do_not_collude() {
        let (mut rng, keys) = fixture();
        let m = GtElement::random(&mut rng);
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(set(&[1, 2])).unwrap(), &mut rng).unwrap();
        let ka = abe_keygen(&keys.mk, &set(&[1]), &mut rng).unwrap();
        let kb = abe_keygen(&keys.mk, &set(&[2]), &mut rng).unwrap();
        for base in [&ka, &kb] {
            let mut spliced = AbeSecretKey { d: base.d, components: BTreeMap::new() };
            spliced.components.extend(ka.components.clone());
            spliced.components.extend(kb.components.clone());
            assert_eq!(abe_decrypt(&keys.pk, &spliced, &ct), Err(Error::WrongAuthority));
        }
    }

    #[test]
    fn exhaustive_subsets_of_four_attributes() {
        let (mut rng, keys) = fixture();
        let subset = |mask: u8| -> BTreeSet<Attribute> { (0..4).filter(|b| mask & (1 << b) != 0).map(attr).collect() };
        let sks: Vec<_> = (1u8..16).map(|k| (k, abe_keygen(&keys.mk, &subset(k), &mut rng).unwrap())).collect();
        for p in 1u8..16 {
            let m = GtElement::random(&mut rng);
            let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(subset(p)).unwrap(), &mut rng).unwrap();
            for (k, sk) in &sks {
                let res = abe_decrypt(&keys.pk, sk, &ct);
                if k & p == p {
                    assert_eq!(res.unwrap(), m);
                } else {
                    assert_eq!(res, Err(Error::PolicyNotSatisfied));
                }
            }
        }
    }

    #[test]
    fn encodings_round_trip() {
        let (mut rng, keys) = fixture();
        let m = GtElement::random(&mut rng);
        let attrs: BTreeSet<Attribute> = (0..3).map(|_| rng.gen()).collect();
        let ct = abe_encrypt(&keys.pk, &m, &AndPolicy::new(attrs.clone()).unwrap(), &mut rng).unwrap();
        let sk = abe_keygen(&keys.mk, &attrs, &mut rng).unwrap();
        let ct2 = AbeCiphertext::from_bytes(&ct.to_bytes()).unwrap();
        let sk2 = AbeSecretKey::from_bytes(&sk.to_bytes()).unwrap();
        let pk2 = AbePublicKey::from_bytes(&keys.pk.to_bytes()).unwrap();
        let mk2 = AbeMasterKey::from_bytes(&keys.mk.to_bytes()).unwrap();
        assert_eq!(abe_decrypt(&pk2, &sk2, &ct2).unwrap(), m);
        let sk3 = abe_keygen(&mk2, &attrs, &mut rng).unwrap();
        assert_eq!(abe_decrypt(&pk2, &sk3, &ct2).unwrap(), m);
        let mut bad = ct.to_bytes();
        bad.truncate(bad.len() - 1);
        assert!(matches!(AbeCiphertext::from_bytes(&bad), Err(Error::Decode(_))));
        assert!(AbeCiphertext::from_bytes(&sk.to_bytes()).is_err());
    }
}
