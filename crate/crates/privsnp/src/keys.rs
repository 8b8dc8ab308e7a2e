//! JSON key files for the trusted setup party, hospitals and clients.

use std::collections::BTreeMap;
use std::path::Path;

use privsnp_core::abe::{AbeKeys, AbeMasterKey, AbePublicKey};
use privsnp_core::hospital::{ClientGrant, HospitalKeyBundle};
use privsnp_core::primitives::{PrfKey, Scalar, Signature, SignatureKeyPair, SymKey};
use serde::{Deserialize, Serialize};

use crate::b64::{self, array};
use crate::error::{read_file, write_file, Result};

fn save<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    write_file(path, serde_json::to_string_pretty(v)?.as_bytes())
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_file(path)?)?)
}

/// Global PRF key `K`, minted by the trusted setup party.
#[derive(Serialize, Deserialize)]
pub struct SystemKeyFile {
    #[serde(with = "b64")]
    pub prf_key: Vec<u8>,
}

impl SystemKeyFile {
    pub fn new(k: &PrfKey) -> Self {
        Self { prf_key: k.as_bytes().to_vec() }
    }

    pub fn prf_key(&self) -> Result<PrfKey> {
        Ok(PrfKey::from_bytes(array(&self.prf_key)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load(path)
    }
}

#[derive(Serialize, Deserialize)]
pub struct HospitalKeyFile {
    pub hospital_id: String,
    #[serde(with = "b64")]
    pub k_alpha: Vec<u8>,
    #[serde(with = "b64")]
    pub k_beta: Vec<u8>,
    #[serde(with = "b64")]
    pub k_i: Vec<u8>,
    #[serde(with = "b64")]
    pub sig_secret: Vec<u8>,
    #[serde(with = "b64")]
    pub abe_pk: Vec<u8>,
    #[serde(with = "b64")]
    pub abe_mk: Vec<u8>,
}

impl HospitalKeyFile {
    pub fn new(hospital_id: &str, k: &HospitalKeyBundle) -> Self {
        Self {
            hospital_id: hospital_id.into(),
            k_alpha: k.k_alpha.as_bytes().to_vec(),
            k_beta: k.k_beta.as_bytes().to_vec(),
            k_i: k.k_i.to_bytes().to_vec(),
            sig_secret: k.sig_keys.secret_bytes().to_vec(),
            abe_pk: k.abe_keys.pk.to_bytes(),
            abe_mk: k.abe_keys.mk.to_bytes(),
        }
    }

    pub fn bundle(&self) -> Result<HospitalKeyBundle> {
        Ok(HospitalKeyBundle {
            k_alpha: SymKey::from_bytes(array(&self.k_alpha)?),
            k_beta: SymKey::from_bytes(array(&self.k_beta)?),
            k_i: Scalar::from_bytes(&self.k_i)?,
            sig_keys: SignatureKeyPair::from_secret_bytes(array(&self.sig_secret)?),
            abe_keys: AbeKeys { pk: AbePublicKey::from_bytes(&self.abe_pk)?, mk: AbeMasterKey::from_bytes(&self.abe_mk)? },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load(path)
    }
}

#[derive(Clone, Serialize, Deserialize)]
pub struct GrantEntry {
    #[serde(with = "b64")]
    pub prf_key: Vec<u8>,
    #[serde(with = "b64")]
    pub k_beta: Vec<u8>,
    #[serde(with = "b64")]
    pub sigma: Vec<u8>,
}

impl GrantEntry {
    pub fn new(g: &ClientGrant) -> Self {
        Self { prf_key: g.prf_key.as_bytes().to_vec(), k_beta: g.k_beta.as_bytes().to_vec(), sigma: g.sigma.to_bytes().to_vec() }
    }

    pub fn grant(&self) -> Result<ClientGrant> {
        Ok(ClientGrant {
            prf_key: PrfKey::from_bytes(array(&self.prf_key)?),
            k_beta: SymKey::from_bytes(array(&self.k_beta)?),
            sigma: Signature::from_bytes(&self.sigma)?,
        })
    }
}

/// Client secret `k_c` and the grants received from hospitals.
#[derive(Serialize, Deserialize)]
pub struct ClientKeyFile {
    pub client_id: String,
    #[serde(with = "b64")]
    pub k_c: Vec<u8>,
    #[serde(default)]
    pub grants: BTreeMap<String, GrantEntry>,
}

impl ClientKeyFile {
    pub fn new(client_id: &str, k_c: &Scalar) -> Self {
        Self { client_id: client_id.into(), k_c: k_c.to_bytes().to_vec(), grants: BTreeMap::new() }
    }

    pub fn k_c(&self) -> Result<Scalar> {
        Ok(Scalar::from_bytes(&self.k_c)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load(path)
    }
}
