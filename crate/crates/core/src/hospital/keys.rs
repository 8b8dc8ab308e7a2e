use rand_core::{CryptoRng, RngCore};

use crate::abe::{abe_setup, AbeKeys};
use crate::primitives::{GroupParams, Scalar, SignatureKeyPair, SymKey};

/// Secret material held by one hospital.
#[derive(Clone)]
pub struct HospitalKeyBundle {
    /// Encrypts genome records; never leaves the hospital.
    pub k_alpha: SymKey,
    /// Inner ASI layer; released to approved clients.
    pub k_beta: SymKey,
    /// Exponent behind ASI attributes and shared keys; never leaves the hospital.
    pub k_i: Scalar,
    pub sig_keys: SignatureKeyPair,
    pub abe_keys: AbeKeys,
}

impl core::fmt::Debug for HospitalKeyBundle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HospitalKeyBundle").field("sig_pk", &self.sig_keys.public()).finish_non_exhaustive()
    }
}

pub fn hospital_setup<R: RngCore + CryptoRng>(params: &GroupParams, rng: &mut R) -> HospitalKeyBundle {
    HospitalKeyBundle {
        k_alpha: SymKey::random(rng),
        k_beta: SymKey::random(rng),
        k_i: Scalar::random(rng),
        sig_keys: SignatureKeyPair::generate(rng),
        abe_keys: abe_setup(params, rng),
    }
}
