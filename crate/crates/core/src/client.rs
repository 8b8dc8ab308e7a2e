//! Query-side algorithms run by an authorized client.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filters::StandardBloomFilter;
use crate::hospital::{snp_token, SnpPair};
use crate::indexing::position_token;
use crate::params::SystemParams;
use crate::primitives::{sym_decrypt, G1Point, KeyedPrf, PrfKey, Scalar, Signature, SymKey};

/// Absorbs float noise in `epsilon_frac * |S|` before taking the ceiling.
const CEIL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    /// First-layer PRF images of the query filter's set bits.
    pub e_set: BTreeSet<[u8; 32]>,
    /// Minimum number of matching bits.
    pub epsilon_bits: u64,
    pub k_c: usize,
    pub sigmas: Vec<Signature>,
    pub config_fingerprint: [u8; 32],
}

/// Builds the query. `epsilon_frac` is the fraction of query SNPs that must
/// match; it is rescaled to a bit threshold with half-up rounding.
pub fn query_gen(
    k: &PrfKey,
    snps: &[SnpPair],
    epsilon_frac: f64,
    k_c: usize,
    sigmas: Vec<Signature>,
    params: &SystemParams,
) -> Result<Query> {
    let set: BTreeSet<&SnpPair> = snps.iter().collect();
    if set.is_empty() {
        return Err(Error::EmptyInput("query SNPs"));
    }
    if !(epsilon_frac > 0.0 && epsilon_frac <= 1.0) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1]"));
    }
    if k_c == 0 {
        return Err(Error::InvalidParameter("k_c must be positive"));
    }
    let mut bf = StandardBloomFilter::new(params.bloom);
    for s in &set {
        bf.add(&s.encode());
    }
    let prf = KeyedPrf::new(k);
    let e_set: BTreeSet<[u8; 32]> = bf.positions().map(|p| position_token(&prf, p)).collect();
    let n = set.len() as u64;
    let eps_snps = (libm::ceil(epsilon_frac * n as f64 - CEIL_SLACK) as u64).clamp(1, n);
    let count = e_set.len() as u64;
    let epsilon_bits = (2 * count * eps_snps + n) / (2 * n);
    Ok(Query { e_set, epsilon_bits, k_c, sigmas, config_fingerprint: params.fingerprint() })
}

/// One search token per distinct queried SNP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSet {
    pub tokens: Vec<G1Point>,
}

pub fn token_gen(k_c: &Scalar, snps: &[SnpPair]) -> Result<TokenSet> {
    let set: BTreeSet<&SnpPair> = snps.iter().collect();
    if set.is_empty() {
        return Err(Error::EmptyInput("token SNPs"));
    }
    let inv = k_c.inverse()?;
    Ok(TokenSet { tokens: set.into_iter().map(|s| snp_token(&inv, s)).collect() })
}

/// Opens each released ASI ciphertext; failures are reported per element.
pub fn asi_decrypt(k_beta: &SymKey, ciphers: &[Vec<u8>]) -> Vec<Result<Vec<u8>>> {
    ciphers.iter().map(|c| sym_decrypt(k_beta, c)).collect()
}
