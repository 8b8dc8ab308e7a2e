use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use super::node::{CbfDictionary, IndexSalt, NodeId};
use crate::error::{Error, Result};
use crate::filters::{CbfParams, CustomizedBloomFilter, StandardBloomFilter};
use crate::hospital::Pseudonym;
use crate::primitives::{h0, sign, verify, KeyedPrf, PrfKey, Signature, SignatureKeyPair, VerifyingKey};

/// Keyed token of a standard-filter bit position. Positions are encoded as
/// 8-byte little-endian integers.
pub fn position_token(k: &KeyedPrf, pos: u32) -> [u8; 32] {
    k.eval(&u64::from(pos).to_le_bytes())
}

/// Message signed to bind an index salt to its owner.
pub fn salt_message(pk: &VerifyingKey, r: &IndexSalt) -> [u8; 32] {
    h0(&pk.to_bytes(), r.as_bytes())
}

/// A flat encrypted index: one CBF per patient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedIndex {
    pub dict: CbfDictionary,
    pub pk: VerifyingKey,
    pub r: IndexSalt,
    pub sigma: Signature,
}

impl EncryptedIndex {
    pub fn verify_salt(&self) -> bool {
        verify(&self.pk, &self.sigma, &salt_message(&self.pk, &self.r))
    }
}

pub fn index_gen<R: RngCore + CryptoRng>(
    k: &PrfKey,
    filters: &BTreeMap<Pseudonym, StandardBloomFilter>,
    keys: &SignatureKeyPair,
    cbf: CbfParams,
    rng: &mut R,
) -> Result<EncryptedIndex> {
    index_gen_with_salt(k, filters, keys, cbf, PrfKey::random(rng))
}

/// Deterministic variant of [`index_gen`] for a caller-chosen salt.
pub fn index_gen_with_salt(
    k: &PrfKey,
    filters: &BTreeMap<Pseudonym, StandardBloomFilter>,
    keys: &SignatureKeyPair,
    cbf: CbfParams,
    r: IndexSalt,
) -> Result<EncryptedIndex> {
    let first = filters.values().next().ok_or(Error::EmptyInput("no patient filters"))?;
    if filters.values().any(|bf| bf.params() != first.params()) {
        return Err(Error::InvalidParameter("patient filters use different parameters"));
    }
    let outer = KeyedPrf::new(k);
    let inner = KeyedPrf::new(&r);
    // Common SNPs repeat across patients, so the first layer is memoised.
    let mut zeta1: BTreeMap<u32, [u8; 32]> = BTreeMap::new();
    let mut dict = CbfDictionary::new();
    let mut tokens: Vec<[u8; 32]> = Vec::new();
    for (p, bf) in filters {
        tokens.clear();
        for pos in bf.positions() {
            let z1 = *zeta1.entry(pos).or_insert_with(|| position_token(&outer, pos));
            tokens.push(inner.eval(&z1));
        }
        let mut c = CustomizedBloomFilter::new(cbf);
        c.add_all(tokens.iter().map(|t| &t[..]));
        dict.insert(NodeId::leaf(p), c)?;
    }
    let pk = keys.public();
    let sigma = sign(keys, &salt_message(&pk, &r));
    Ok(EncryptedIndex { dict, pk, r, sigma })
}
