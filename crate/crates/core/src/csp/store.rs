use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use super::asi::{asi_search, token_adjust};
use super::result::ResultDict;
use super::search::{search, search_merged, SearchMode};
use crate::abe::AbeKeys;
use crate::client::{Query, TokenSet};
use crate::error::{Error, Result};
use crate::hospital::{AsiCiphertext, Pseudonym, SharedKey};
use crate::indexing::{
    hierarchical_index_gen, index_merge_fast, index_merge_full, EncryptedIndex, HierarchicalIndex, IndexSalt, MergedIndex,
    NodeId,
};
use crate::params::SystemParams;

pub type HospitalId = String;
pub type ClientId = String;

/// Everything the CSP holds. Contains no plaintext and no client or
/// hospital secret beyond the ABE master keys it is entrusted with.
#[derive(Clone, Debug)]
pub struct CspStore {
    params: SystemParams,
    hier: BTreeMap<HospitalId, HierarchicalIndex>,
    merged: Option<MergedIndex>,
    asi: BTreeMap<HospitalId, BTreeMap<Pseudonym, Vec<AsiCiphertext>>>,
    snp: BTreeMap<HospitalId, Vec<u8>>,
    shared_keys: BTreeMap<(HospitalId, ClientId), SharedKey>,
    abe: BTreeMap<HospitalId, AbeKeys>,
}

/// Checks an uploaded flat index and clusters it.
pub fn prepare_index(params: &SystemParams, index: &EncryptedIndex) -> Result<HierarchicalIndex> {
    if !index.verify_salt() {
        return Err(Error::Authentication);
    }
    if index.dict.params() != Some(&params.cbf) {
        return Err(Error::InvalidParameter("index CBF parameters differ from the system's"));
    }
    hierarchical_index_gen(index, params.mds_dim)
}

impl CspStore {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            hier: BTreeMap::new(),
            merged: None,
            asi: BTreeMap::new(),
            snp: BTreeMap::new(),
            shared_keys: BTreeMap::new(),
            abe: BTreeMap::new(),
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn upload_index(&mut self, hospital: &str, index: &EncryptedIndex) -> Result<()> {
        let hi = prepare_index(&self.params, index)?;
        self.insert_index(hospital, hi)
    }

    /// Installs an already clustered index. Any merged index becomes stale
    /// and is dropped.
    pub fn insert_index(&mut self, hospital: &str, index: HierarchicalIndex) -> Result<()> {
        if self.hier.iter().any(|(h, ix)| h != hospital && ix.r == index.r) {
            return Err(Error::InvalidParameter("salt already used by another hospital"));
        }
        self.hier.insert(hospital.into(), index);
        self.merged = None;
        Ok(())
    }

    pub fn upload_ciphertexts(
        &mut self,
        hospital: &str,
        snp_blob: Vec<u8>,
        asi: BTreeMap<Pseudonym, Vec<AsiCiphertext>>,
        abe: AbeKeys,
    ) {
        self.snp.insert(hospital.into(), snp_blob);
        self.asi.insert(hospital.into(), asi);
        self.abe.insert(hospital.into(), abe);
    }

    /// Replaces any earlier key for the same pair.
    pub fn register_shared_key(&mut self, hospital: &str, client: &str, key: SharedKey) {
        self.shared_keys.insert((hospital.into(), client.into()), key);
    }

    pub fn index_count(&self) -> usize {
        self.hier.len()
    }

    pub fn indices(&self) -> &BTreeMap<HospitalId, HierarchicalIndex> {
        &self.hier
    }

    pub fn merged(&self) -> Option<&MergedIndex> {
        self.merged.as_ref()
    }

    pub fn snp_blob(&self, hospital: &str) -> Option<&[u8]> {
        self.snp.get(hospital).map(Vec::as_slice)
    }

    /// Merges the current per-hospital indices, in hospital-id order.
    pub fn build_merged(&self, fast: bool) -> Result<MergedIndex> {
        let all: Vec<HierarchicalIndex> = self.hier.values().cloned().collect();
        if fast {
            index_merge_fast(&all, self.params.mds_dim)
        } else {
            index_merge_full(&all, self.params.mds_dim)
        }
    }

    /// Installs a merged index if it covers exactly the current hospitals.
    pub fn install_merged(&mut self, merged: MergedIndex) -> bool {
        let have: BTreeSet<&IndexSalt> = self.hier.values().map(|ix| &ix.r).collect();
        let got: BTreeSet<&IndexSalt> = merged.upsilon.iter().map(|(_, r)| r).collect();
        if have != got {
            return false;
        }
        self.merged = Some(merged);
        true
    }

    fn hospital_of(&self, r: &IndexSalt) -> Option<&HospitalId> {
        self.hier.iter().find(|(_, ix)| &ix.r == r).map(|(h, _)| h)
    }

    /// Runs the similarity search and, for every match, policy-gated ASI
    /// retrieval.
    pub fn handle_query<R: RngCore + CryptoRng>(
        &self,
        client: &str,
        request: &QueryRequest,
        mode: SearchMode,
        rng: &mut R,
    ) -> Result<QueryResponse, QueryError> {
        let q = &request.query;
        if q.config_fingerprint != self.params.fingerprint() {
            return Err(QueryError::ConfigMismatch);
        }
        let hits = self.similarity(q, mode)?.ok_or(QueryError::Unauthorized)?;
        let mut response = QueryResponse::default();
        if hits.is_empty() {
            return Ok(response);
        }

        let mut by_hospital: BTreeMap<&HospitalId, BTreeSet<Pseudonym>> = BTreeMap::new();
        for (key, score) in hits.ranked() {
            let (p, r) = key.split_composite().map_err(QueryError::Internal)?;
            let h = self.hospital_of(&r).ok_or(QueryError::Internal(Error::CorruptIndex("unknown salt")))?;
            by_hospital.entry(h).or_default().insert(p);
            response.matches.push(Match { hospital_id: h.clone(), pseudonym: p, score });
        }
        for (h, pseudonyms) in by_hospital {
            let shared =
                self.shared_keys.get(&(h.clone(), client.into())).ok_or_else(|| QueryError::NoSharedKey(h.clone()))?;
            let (Some(store), Some(abe)) = (self.asi.get(h), self.abe.get(h)) else { continue };
            let tk_star = token_adjust(&request.tokens, shared);
            for p in &pseudonyms {
                let one = BTreeSet::from([*p]);
                for c1 in asi_search(&tk_star, &one, store, abe, rng).map_err(QueryError::Internal)? {
                    response.asi_ciphertexts.push(ReleasedAsi { hospital_id: h.clone(), pseudonym: *p, c1 });
                }
            }
        }
        Ok(response)
    }

    /// Result keys are always pseudonym and salt, whichever index answered.
    /// `None` when no hospital accepted any of the query's signatures.
    pub fn similarity(&self, q: &Query, mode: SearchMode) -> Result<Option<ResultDict>, QueryError> {
        if let Some(m) = &self.merged {
            return search_merged(m, q, mode).map_err(QueryError::Internal);
        }
        let mut combined: Option<ResultDict> = None;
        for ix in self.hier.values() {
            let Some(d) = search(ix, q, mode).map_err(QueryError::Internal)? else { continue };
            let acc = combined.get_or_insert_with(|| ResultDict::new(q.k_c));
            for (k, s) in d.ranked() {
                let p = k.pseudonym().map_err(QueryError::Internal)?;
                acc.insert(NodeId::composite(&p, &ix.r), s);
            }
        }
        Ok(combined)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRequest {
    pub query: Query,
    pub tokens: TokenSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub hospital_id: HospitalId,
    pub pseudonym: Pseudonym,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReleasedAsi {
    pub hospital_id: HospitalId,
    pub pseudonym: Pseudonym,
    /// Still encrypted under the hospital's `k_beta`.
    pub c1: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryResponse {
    /// Best first.
    pub matches: Vec<Match>,
    pub asi_ciphertexts: Vec<ReleasedAsi>,
}

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("query was built under different system parameters")]
    ConfigMismatch,
    #[error("no signature in the query verifies against any index")]
    Unauthorized,
    #[error("no shared key registered for hospital {0}")]
    NoSharedKey(HospitalId),
    #[error(transparent)]
    Internal(Error),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::ConfigMismatch => "config_mismatch",
            Self::Unauthorized => "unauthorized",
            Self::NoSharedKey(_) => "no_shared_key",
            Self::Internal(_) => "internal",
        }
    }
}
