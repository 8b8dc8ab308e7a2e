//! On-disk layout of a deployment directory.
//!
//! ```text
//! D/config.toml
//! D/system.json
//! D/hospitals/<h>/{keys.json, records.jsonl, filters.psbb, index.psix,
//!                  ciphertexts.json, allowlist.txt, shared/<client>.json}
//! D/clients/<c>.json
//! ```

use std::path::{Path, PathBuf};

use privsnp_core::hospital::{AllowList, SharedKey};
use privsnp_core::{Reader, Writer};
use serde::{Deserialize, Serialize};

use crate::b64;
use crate::error::{read_file, write_file, Error, Result};
use crate::formats::encode_cbf;
use crate::wire::{parse_shared_key, AsiEntry};

#[derive(Clone, Debug)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn system_keys(&self) -> PathBuf {
        self.root.join("system.json")
    }

    pub fn hospital_dir(&self, h: &str) -> PathBuf {
        self.root.join("hospitals").join(h)
    }

    pub fn hospital_keys(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("keys.json")
    }

    pub fn records(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("records.jsonl")
    }

    pub fn filters(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("filters.psbb")
    }

    pub fn index(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("index.psix")
    }

    pub fn ciphertexts(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("ciphertexts.json")
    }

    pub fn allowlist(&self, h: &str) -> PathBuf {
        self.hospital_dir(h).join("allowlist.txt")
    }

    pub fn shared_key(&self, h: &str, client: &str) -> PathBuf {
        self.hospital_dir(h).join("shared").join(format!("{client}.json"))
    }

    pub fn client(&self, c: &str) -> PathBuf {
        self.root.join("clients").join(format!("{c}.json"))
    }

    /// Hospital ids with a key file, sorted.
    pub fn hospitals(&self) -> Result<Vec<String>> {
        let dir = self.root.join("hospitals");
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for e in std::fs::read_dir(&dir).map_err(|source| Error::Io { path: dir.clone(), source })? {
            let e = e?;
            let name = e.file_name().to_string_lossy().into_owned();
            if self.hospital_keys(&name).exists() {
                out.push(name);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Client ids with a stored shared key at `h`, sorted.
    pub fn shared_keys(&self, h: &str) -> Result<Vec<String>> {
        let dir = self.hospital_dir(h).join("shared");
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for e in std::fs::read_dir(&dir).map_err(|source| Error::Io { path: dir.clone(), source })? {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "json") {
                out.extend(p.file_stem().map(|s| s.to_string_lossy().into_owned()));
            }
        }
        out.sort();
        Ok(out)
    }
}

/// One client id per line; `#` starts a comment. A missing file denies all.
pub fn read_allowlist(path: &Path) -> Result<AllowList> {
    if !path.exists() {
        return Ok(AllowList::default());
    }
    let text = String::from_utf8_lossy(&read_file(path)?).into_owned();
    Ok(AllowList::new(
        text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).map(str::to_owned),
    ))
}

pub fn encode_snp_blob(per_record: &[Vec<u8>]) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(per_record.len() as u32);
    for c in per_record {
        w.bytes(c);
    }
    w.finish()
}

pub fn decode_snp_blob(blob: &[u8]) -> Result<Vec<Vec<u8>>> {
    let mut r = Reader::new(blob);
    let n = r.u32()?;
    let mut out = Vec::new();
    for _ in 0..n {
        out.push(r.bytes()?.to_vec());
    }
    r.finish()?;
    Ok(out)
}

/// Output of the `encrypt` step, ready for upload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiphertextFile {
    #[serde(with = "b64")]
    pub snp_blob: Vec<u8>,
    pub asi_entries: Vec<AsiEntry>,
}

impl CiphertextFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &serde_json::to_vec(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&read_file(path)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedKeyFile {
    #[serde(with = "b64")]
    pub delta: Vec<u8>,
    #[serde(with = "b64")]
    pub cbf_blob: Vec<u8>,
}

impl SharedKeyFile {
    pub fn new(key: &SharedKey) -> Self {
        Self { delta: key.delta.to_bytes().to_vec(), cbf_blob: encode_cbf(&key.cbf) }
    }

    pub fn key(&self) -> Result<SharedKey> {
        parse_shared_key(&self.delta, &self.cbf_blob)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &serde_json::to_vec(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&read_file(path)?)?)
    }
}
