use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::keys::HospitalKeyBundle;
use super::records::SnpPair;
use crate::error::{Error, Result};
use crate::filters::{CbfParams, CustomizedBloomFilter};
use crate::primitives::{g2_generator, h1, G1Point, G2Point, PrfKey, Scalar, Signature, SymKey};

/// Token-adjustment key registered at the CSP for one (hospital, client).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedKey {
    pub delta: G2Point,
    pub cbf: CustomizedBloomFilter,
}

/// `h1(v)^(1/k_c)`, the search token of `v` under a client key.
pub fn snp_token(k_c_inv: &Scalar, snp: &SnpPair) -> G1Point {
    h1(&snp.encode()).mul(k_c_inv)
}

pub fn shared_key_gen(k_i: &Scalar, k_c: &Scalar, authorized: &[SnpPair], cbf: CbfParams) -> Result<SharedKey> {
    if authorized.is_empty() {
        return Err(Error::EmptyInput("authorized SNP set"));
    }
    let delta = g2_generator().mul(&k_c.div(k_i)?);
    let inv = k_c.inverse()?;
    let mut filter = CustomizedBloomFilter::new(cbf);
    for s in authorized {
        filter.add(&snp_token(&inv, s).to_bytes());
    }
    Ok(SharedKey { delta, cbf: filter })
}

#[derive(Clone, Debug)]
pub struct AuthorizationRequest {
    pub client_id: String,
    /// Minted by the client and sent over a secure channel.
    pub k_c: Scalar,
    pub snp_scope: Vec<SnpPair>,
}

/// Approval predicate consulted before any key material is released.
pub trait AuthorizationPolicy {
    fn approve(&self, request: &AuthorizationRequest) -> bool;
}

/// Approves exactly the listed client ids.
#[derive(Clone, Debug, Default)]
pub struct AllowList(pub BTreeSet<String>);

impl AllowList {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        Self(ids.into_iter().map(Into::into).collect())
    }
}

impl AuthorizationPolicy for AllowList {
    fn approve(&self, request: &AuthorizationRequest) -> bool {
        self.0.contains(&request.client_id)
    }
}

/// Secrets delivered to an approved client.
#[derive(Clone, Debug)]
pub struct ClientGrant {
    pub prf_key: PrfKey,
    pub k_beta: SymKey,
    /// Signature over the hospital's index salt.
    pub sigma: Signature,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum AuthorizationDecision {
    /// `shared_key` goes to the CSP, `grant` to the client.
    Approved { shared_key: SharedKey, grant: ClientGrant },
    Denied,
}

pub fn authorize_client(
    keys: &HospitalKeyBundle,
    prf_key: &PrfKey,
    sigma: &Signature,
    cbf: CbfParams,
    policy: &dyn AuthorizationPolicy,
    request: &AuthorizationRequest,
) -> Result<AuthorizationDecision> {
    if !policy.approve(request) {
        return Ok(AuthorizationDecision::Denied);
    }
    let shared_key = shared_key_gen(&keys.k_i, &request.k_c, &request.snp_scope, cbf)?;
    let grant = ClientGrant { prf_key: prf_key.clone(), k_beta: keys.k_beta.clone(), sigma: *sigma };
    Ok(AuthorizationDecision::Approved { shared_key, grant })
}
