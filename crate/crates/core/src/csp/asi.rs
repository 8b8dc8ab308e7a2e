use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use crate::abe::{abe_decrypt, abe_keygen, AbeKeys, Attribute};
use crate::client::TokenSet;
use crate::error::{Error, Result};
use crate::hospital::{asi_attribute, AsiCiphertext, Pseudonym, SharedKey};
use crate::primitives::{kdf, pair, sym_decrypt, GtElement, SymKey};

/// Turns client tokens into hospital-specific pairing values. Tokens outside
/// the shared key's authorized set are dropped.
pub fn token_adjust(tokens: &TokenSet, shared: &SharedKey) -> Vec<GtElement> {
    tokens
        .tokens
        .iter()
        .filter(|tk| shared.cbf.contains(&tk.to_bytes()))
        .map(|tk| pair(tk, &shared.delta))
        .collect()
}

/// Releases the inner ciphertext of every ASI of the given patients whose
/// policy the adjusted tokens satisfy.
pub fn asi_search<R: RngCore + CryptoRng>(
    tk_star: &[GtElement],
    pseudonyms: &BTreeSet<Pseudonym>,
    store: &BTreeMap<Pseudonym, Vec<AsiCiphertext>>,
    abe: &AbeKeys,
    rng: &mut R,
) -> Result<Vec<Vec<u8>>> {
    let mut released = Vec::new();
    if tk_star.is_empty() {
        return Ok(released);
    }
    for p in pseudonyms {
        let Some(cts) = store.get(p) else { continue };
        for ct in cts {
            let theta: BTreeSet<Attribute> = tk_star.iter().map(|t| asi_attribute(&ct.tau, t)).collect();
            let sk = abe_keygen(&abe.mk, &theta, rng)?;
            match abe_decrypt(&abe.pk, &sk, &ct.c3) {
                Ok(k_gamma) => released.push(sym_decrypt(&SymKey::from_bytes(kdf(&k_gamma)), &ct.c2)?),
                Err(Error::PolicyNotSatisfied) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(released)
}
