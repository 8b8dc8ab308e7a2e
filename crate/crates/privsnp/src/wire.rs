//! Service messages: JSON objects tagged by `type`, binary fields in
//! base64url without padding.

use std::collections::BTreeMap;

use privsnp_core::abe::{AbeCiphertext, AbeKeys, AbeMasterKey, AbePublicKey};
use privsnp_core::client::{Query, TokenSet};
use privsnp_core::csp::{QueryRequest, QueryResponse};
use privsnp_core::hospital::{AsiCiphertext, Pseudonym, SharedKey};
use privsnp_core::indexing::EncryptedIndex;
use privsnp_core::primitives::{G1Point, G2Point, Signature};
use serde::{Deserialize, Serialize};

use crate::b64::{self, array};
use crate::error::{Error, Result};
use crate::formats::{decode_cbf, decode_index, encode_cbf, encode_flat_index, IndexFile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsiEntry {
    pub pseudonym: String,
    #[serde(with = "b64")]
    pub c3: Vec<u8>,
    #[serde(with = "b64")]
    pub c2: Vec<u8>,
    #[serde(with = "b64")]
    pub tau: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryMsg {
    pub client_id: String,
    #[serde(with = "b64::list")]
    pub e_set: Vec<Vec<u8>>,
    pub epsilon_bits: u64,
    pub k_c: usize,
    #[serde(with = "b64::list")]
    pub sigmas: Vec<Vec<u8>>,
    #[serde(with = "b64::list")]
    pub tokens: Vec<Vec<u8>>,
    #[serde(with = "b64")]
    pub config_fingerprint: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Request {
    UploadIndex {
        hospital_id: String,
        #[serde(with = "b64")]
        index_blob: Vec<u8>,
        #[serde(with = "b64")]
        sigma: Vec<u8>,
    },
    UploadCiphertexts {
        hospital_id: String,
        #[serde(with = "b64")]
        snp_blob: Vec<u8>,
        asi_entries: Vec<AsiEntry>,
        #[serde(with = "b64")]
        abe_pk: Vec<u8>,
        #[serde(with = "b64")]
        abe_mk: Vec<u8>,
    },
    RegisterSharedKey {
        hospital_id: String,
        client_id: String,
        #[serde(with = "b64")]
        delta: Vec<u8>,
        #[serde(with = "b64")]
        cbf_blob: Vec<u8>,
    },
    Query(QueryMsg),
    MergeNow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchMsg {
    pub hospital_id: String,
    pub pseudonym: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasedMsg {
    pub hospital_id: String,
    pub pseudonym: String,
    #[serde(with = "b64")]
    pub c1: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Response {
    Ok,
    QueryResult { matches: Vec<MatchMsg>, asi_ciphertexts: Vec<ReleasedMsg> },
    Error { error_code: String, message: String },
}

impl Response {
    pub fn error(code: &str, message: impl ToString) -> Self {
        Self::Error { error_code: code.into(), message: message.to_string() }
    }
}

pub fn asi_entries(asi: &BTreeMap<Pseudonym, Vec<AsiCiphertext>>) -> Vec<AsiEntry> {
    asi.iter()
        .flat_map(|(p, cs)| {
            cs.iter().map(move |c| AsiEntry {
                pseudonym: p.to_string(),
                c3: c.c3.to_bytes(),
                c2: c.c2.clone(),
                tau: c.tau.to_vec(),
            })
        })
        .collect()
}

pub fn parse_asi_entries(entries: &[AsiEntry]) -> Result<BTreeMap<Pseudonym, Vec<AsiCiphertext>>> {
    let mut out: BTreeMap<Pseudonym, Vec<AsiCiphertext>> = BTreeMap::new();
    for e in entries {
        let c = AsiCiphertext { c3: AbeCiphertext::from_bytes(&e.c3)?, c2: e.c2.clone(), tau: array(&e.tau)? };
        out.entry(Pseudonym::from_hex(&e.pseudonym)?).or_default().push(c);
    }
    Ok(out)
}

impl Request {
    pub fn upload_index(hospital_id: &str, index: &EncryptedIndex) -> Result<Self> {
        Ok(Self::UploadIndex {
            hospital_id: hospital_id.into(),
            index_blob: encode_flat_index(index)?,
            sigma: index.sigma.to_bytes().to_vec(),
        })
    }

    pub fn upload_ciphertexts(
        hospital_id: &str,
        snp_blob: Vec<u8>,
        asi: &BTreeMap<Pseudonym, Vec<AsiCiphertext>>,
        abe: &AbeKeys,
    ) -> Self {
        Self::UploadCiphertexts {
            hospital_id: hospital_id.into(),
            snp_blob,
            asi_entries: asi_entries(asi),
            abe_pk: abe.pk.to_bytes(),
            abe_mk: abe.mk.to_bytes(),
        }
    }

    pub fn register_shared_key(hospital_id: &str, client_id: &str, key: &SharedKey) -> Self {
        Self::RegisterSharedKey {
            hospital_id: hospital_id.into(),
            client_id: client_id.into(),
            delta: key.delta.to_bytes().to_vec(),
            cbf_blob: encode_cbf(&key.cbf),
        }
    }

    pub fn query(client_id: &str, req: &QueryRequest) -> Self {
        let q = &req.query;
        Self::Query(QueryMsg {
            client_id: client_id.into(),
            e_set: q.e_set.iter().map(|t| t.to_vec()).collect(),
            epsilon_bits: q.epsilon_bits,
            k_c: q.k_c,
            sigmas: q.sigmas.iter().map(|s| s.to_bytes().to_vec()).collect(),
            tokens: req.tokens.tokens.iter().map(|t| t.to_bytes().to_vec()).collect(),
            config_fingerprint: q.config_fingerprint.to_vec(),
        })
    }
}

/// The flat index in an upload, with the separate signature field checked
/// against the one inside the blob.
pub fn parse_upload_index(index_blob: &[u8], sigma: &[u8]) -> Result<EncryptedIndex> {
    let IndexFile::Flat(ix) = decode_index(index_blob)? else {
        return Err(Error::Protocol("index_blob must hold a flat index".into()));
    };
    if Signature::from_bytes(sigma)? != ix.sigma {
        return Err(Error::Protocol("sigma does not match index_blob".into()));
    }
    Ok(ix)
}

pub fn parse_abe_keys(pk: &[u8], mk: &[u8]) -> Result<AbeKeys> {
    Ok(AbeKeys { pk: AbePublicKey::from_bytes(pk)?, mk: AbeMasterKey::from_bytes(mk)? })
}

pub fn parse_shared_key(delta: &[u8], cbf_blob: &[u8]) -> Result<SharedKey> {
    Ok(SharedKey { delta: G2Point::from_bytes(delta)?, cbf: decode_cbf(cbf_blob)? })
}

impl QueryMsg {
    pub fn to_request(&self) -> Result<QueryRequest> {
        let e_set = self.e_set.iter().map(|t| array(t)).collect::<Result<_, _>>()?;
        let sigmas = self.sigmas.iter().map(|s| Signature::from_bytes(s)).collect::<Result<_, _>>()?;
        let tokens = self.tokens.iter().map(|t| G1Point::from_bytes(t)).collect::<Result<_, _>>()?;
        Ok(QueryRequest {
            query: Query {
                e_set,
                epsilon_bits: self.epsilon_bits,
                k_c: self.k_c,
                sigmas,
                config_fingerprint: array(&self.config_fingerprint)?,
            },
            tokens: TokenSet { tokens },
        })
    }
}

impl From<&QueryResponse> for Response {
    fn from(r: &QueryResponse) -> Self {
        Self::QueryResult {
            matches: r
                .matches
                .iter()
                .map(|m| MatchMsg { hospital_id: m.hospital_id.clone(), pseudonym: m.pseudonym.to_string(), score: m.score })
                .collect(),
            asi_ciphertexts: r
                .asi_ciphertexts
                .iter()
                .map(|a| ReleasedMsg { hospital_id: a.hospital_id.clone(), pseudonym: a.pseudonym.to_string(), c1: a.c1.clone() })
                .collect(),
        }
    }
}
