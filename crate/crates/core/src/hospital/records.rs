use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_core::{CryptoRng, RngCore};

use crate::encoding::{Reader, Writer};
use crate::error::{Error, Result};

/// 16-byte patient pseudonym minted at ingestion.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pseudonym(pub [u8; 16]);

impl Pseudonym {
    pub const LEN: usize = 16;

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        Self(b)
    }

    pub fn from_slice(b: &[u8]) -> Result<Self> {
        b.try_into().map(Self).map_err(|_| Error::Decode("pseudonym must be 16 bytes"))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.as_bytes();
        if s.len() != 32 {
            return Err(Error::Decode("pseudonym must be 32 hex digits"));
        }
        let mut out = [0u8; 16];
        for (i, pair) in s.chunks(2).enumerate() {
            let hi = hex_val(pair[0])?;
            let lo = hex_val(pair[1])?;
            out[i] = hi << 4 | lo;
        }
        Ok(Self(out))
    }
}

fn hex_val(c: u8) -> Result<u8> {
    match c {
        b'0'..=b'9' => Ok(c - b'0'),
        b'a'..=b'f' => Ok(c - b'a' + 10),
        b'A'..=b'F' => Ok(c - b'A' + 10),
        _ => Err(Error::Decode("invalid hex digit")),
    }
}

impl fmt::Display for Pseudonym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pseudonym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pseudonym({self})")
    }
}

/// One observed SNP: identifier and minor-allele count in {0, 1, 2}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SnpPair {
    rsid: String,
    value: u8,
}

impl SnpPair {
    pub fn new(rsid: impl Into<String>, value: u8) -> Result<Self> {
        let rsid = rsid.into();
        if rsid.is_empty() {
            return Err(Error::InvalidSnp("empty SNP identifier".to_string()));
        }
        if value > 2 {
            return Err(Error::InvalidSnp(alloc::format!("{rsid}: value {value} not in {{0,1,2}}")));
        }
        Ok(Self { rsid, value })
    }

    pub fn rsid(&self) -> &str {
        &self.rsid
    }

    pub fn value(&self) -> u8 {
        self.value
    }

    /// Item inserted into filters and hashed into tokens:
    /// 8-byte little-endian length, UTF-8 identifier, value byte.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.rsid.len());
        out.extend_from_slice(&(self.rsid.len() as u64).to_le_bytes());
        out.extend_from_slice(self.rsid.as_bytes());
        out.push(self.value);
        out
    }
}

impl fmt::Display for SnpPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.rsid, self.value)
    }
}

/// Parses `rsid:value`.
impl FromStr for SnpPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (id, val) = s.rsplit_once(':').ok_or_else(|| Error::InvalidSnp(alloc::format!("{s}: expected rsid:value")))?;
        let value = val.trim().parse::<u8>().map_err(|_| Error::InvalidSnp(alloc::format!("{s}: bad value")))?;
        Self::new(id.trim(), value)
    }
}

/// A piece of affiliated sensitive information and the SNPs it is tied to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AsiGroup {
    pub text: Vec<u8>,
    pub snps: Vec<SnpPair>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PatientRecord {
    pub pseudonym: Pseudonym,
    pub snps: Vec<SnpPair>,
    pub asi_groups: Vec<AsiGroup>,
}

impl PatientRecord {
    /// Checks that every ASI's SNP set is drawn from the record's SNPs.
    pub fn validate(&self) -> Result<()> {
        let own: alloc::collections::BTreeSet<&SnpPair> = self.snps.iter().collect();
        for g in &self.asi_groups {
            if let Some(missing) = g.snps.iter().find(|s| !own.contains(s)) {
                return Err(Error::InvalidSnp(alloc::format!(
                    "ASI of {} references {missing}, which the record does not contain",
                    self.pseudonym
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn encode_snp_list(snps: &[SnpPair]) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(snps.len() as u32);
    for s in snps {
        w.bytes(s.rsid.as_bytes()).u8(s.value);
    }
    w.finish()
}

pub(crate) fn decode_snp_list(bytes: &[u8]) -> Result<Vec<SnpPair>> {
    let mut r = Reader::new(bytes);
    let n = r.u32()? as usize;
    let mut out = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let id = core::str::from_utf8(r.bytes()?).map_err(|_| Error::Decode("rsid is not UTF-8"))?;
        out.push(SnpPair::new(id, r.u8()?)?);
    }
    r.finish()?;
    Ok(out)
}
