//! Cryptographic building blocks shared by every role.

mod group;
mod hash;
mod sig;
mod sym;

pub use group::{g1_generator, g2_generator, pair, G1Point, G2Point, GroupParams, GtElement, Scalar};
pub use hash::{h0, h1, h2, kdf, prf, tagged_hash, KeyedPrf, PrfKey, DIGEST_LEN};
pub use sig::{sign, verify, Signature, SignatureKeyPair, VerifyingKey};
pub use sym::{sym_decrypt, sym_encrypt, SymKey, NONCE_LEN, TAG_LEN};

pub(crate) use group::multi_pair;
pub(crate) use hash::hash_to_g1;
