//! Hospital-side records, key material and encryption.

mod authorize;
mod encrypt;
mod keys;
mod records;

pub use authorize::{
    authorize_client, shared_key_gen, snp_token, AllowList, AuthorizationDecision, AuthorizationPolicy,
    AuthorizationRequest, ClientGrant, SharedKey,
};
pub use encrypt::{
    adjusted_point, asi_attribute, asi_encrypt, preprocess, snp_decrypt, snp_encrypt, AsiCiphertext, AsiDictionary,
    BloomDictionary,
};
pub use keys::{hospital_setup, HospitalKeyBundle};
pub use records::{AsiGroup, PatientRecord, Pseudonym, SnpPair};
