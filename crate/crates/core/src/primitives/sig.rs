//! Index-authenticity signatures (Ed25519).
//!
//! Everything outside this file goes through [`sign`] / [`verify`] and the
//! three newtypes, so swapping the scheme touches only this module.

use ed25519_dalek::{Signer, Verifier};
use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VerifyingKey([u8; 32]);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Signature([u8; 64]);

#[derive(Clone)]
pub struct SignatureKeyPair {
    sk: ed25519_dalek::SigningKey,
}

impl SignatureKeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self { sk: ed25519_dalek::SigningKey::generate(rng) }
    }

    pub fn public(&self) -> VerifyingKey {
        VerifyingKey(self.sk.verifying_key().to_bytes())
    }

    pub fn secret_bytes(&self) -> [u8; 32] {
        self.sk.to_bytes()
    }

    pub fn from_secret_bytes(bytes: [u8; 32]) -> Self {
        Self { sk: ed25519_dalek::SigningKey::from_bytes(&bytes) }
    }
}

impl core::fmt::Debug for SignatureKeyPair {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SignatureKeyPair").field("pk", &self.public()).finish_non_exhaustive()
    }
}

impl VerifyingKey {
    pub const LEN: usize = 32;

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| Error::Decode("verifying key must be 32 bytes"))?;
        Ok(Self(arr))
    }
}

impl Signature {
    pub const LEN: usize = 64;

    pub fn to_bytes(&self) -> [u8; 64] {
        self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 64] = bytes.try_into().map_err(|_| Error::Decode("signature must be 64 bytes"))?;
        Ok(Self(arr))
    }
}

pub fn sign(keys: &SignatureKeyPair, msg: &[u8]) -> Signature {
    Signature(keys.sk.sign(msg).to_bytes())
}

/// Malformed keys or signatures verify as `false`.
pub fn verify(pk: &VerifyingKey, sig: &Signature, msg: &[u8]) -> bool {
    let Ok(vk) = ed25519_dalek::VerifyingKey::from_bytes(&pk.0) else {
        return false;
    };
    vk.verify(msg, &ed25519_dalek::Signature::from_bytes(&sig.0)).is_ok()
}
