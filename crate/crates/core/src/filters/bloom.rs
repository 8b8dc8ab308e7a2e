use sha2::{Digest, Sha256};

use super::bits::BitArray;
use crate::error::{Error, Result};

const TAG: &[u8] = b"privsnp/bf/v1";

/// Sizing of a standard Bloom filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BloomParams {
    pub capacity: u64,
    pub fp_target: f64,
    /// Bit length `m = ceil(n ln(1/p) / ln^2 2)`.
    pub bits: u32,
    /// Hash count `k = round((m/n) ln 2)`.
    pub hashes: u32,
}

impl BloomParams {
    pub fn new(capacity: u64, fp_target: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter("bloom filter capacity must be at least 1"));
        }
        if !(fp_target > 0.0 && fp_target < 1.0) {
            return Err(Error::InvalidParameter("false-positive target must lie in (0, 1)"));
        }
        let ln2 = core::f64::consts::LN_2;
        let n = capacity as f64;
        let m = libm::ceil(n * libm::log(1.0 / fp_target) / (ln2 * ln2));
        if m > u32::MAX as f64 {
            return Err(Error::InvalidParameter("bloom filter would exceed 2^32 bits"));
        }
        let bits = m as u32;
        let hashes = (libm::round(m / n * ln2) as u32).max(1);
        Ok(Self { capacity, fp_target, bits, hashes })
    }

    /// Rebuilds parameters read from storage, checking them against the
    /// sizing formulas.
    pub fn from_parts(capacity: u64, fp_target: f64, bits: u32, hashes: u32) -> Result<Self> {
        let p = Self::new(capacity, fp_target)?;
        if p.bits != bits || p.hashes != hashes {
            return Err(Error::Decode("bloom parameters inconsistent with capacity/fp"));
        }
        Ok(p)
    }

    /// `(1 - e^{-kn/m})^k` after `n` insertions.
    pub fn expected_fp_rate(&self, inserted: u64) -> f64 {
        let k = self.hashes as f64;
        libm::pow(1.0 - libm::exp(-k * inserted as f64 / self.bits as f64), k)
    }

    /// Bit positions of `item`, double hashing `g_i = h_a + i h_b mod m`.
    pub fn positions(&self, item: &[u8]) -> impl Iterator<Item = u32> {
        let d = Sha256::new().chain_update(TAG).chain_update(item).finalize();
        let ha = u64::from_le_bytes(d[0..8].try_into().unwrap());
        let hb = u64::from_le_bytes(d[8..16].try_into().unwrap()) | 1;
        let m = u64::from(self.bits);
        (0..u64::from(self.hashes)).map(move |i| (ha.wrapping_add(i.wrapping_mul(hb)) % m) as u32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardBloomFilter {
    params: BloomParams,
    bits: BitArray,
}

impl StandardBloomFilter {
    pub fn new(params: BloomParams) -> Self {
        Self { params, bits: BitArray::new(params.bits).expect("bits >= 1 by construction") }
    }

    /// Shorthand for `new(BloomParams::new(capacity, fp_target)?)`.
    pub fn with_capacity(capacity: u64, fp_target: f64) -> Result<Self> {
        Ok(Self::new(BloomParams::new(capacity, fp_target)?))
    }

    pub fn from_bits(params: BloomParams, bits: BitArray) -> Result<Self> {
        if bits.len() != params.bits {
            return Err(Error::LengthMismatch { left: params.bits.into(), right: bits.len().into() });
        }
        Ok(Self { params, bits })
    }

    pub fn params(&self) -> &BloomParams {
        &self.params
    }

    pub fn bits(&self) -> &BitArray {
        &self.bits
    }

    pub fn add(&mut self, item: &[u8]) {
        for p in self.params.positions(item) {
            self.bits.set(p);
        }
    }

    pub fn add_all<'a, I: IntoIterator<Item = &'a [u8]>>(&mut self, items: I) {
        let params = self.params;
        self.bits.extend(items.into_iter().flat_map(move |it| params.positions(it)));
    }

    pub fn contains(&self, item: &[u8]) -> bool {
        self.params.positions(item).all(|p| self.bits.get(p))
    }

    /// Set positions, strictly increasing.
    pub fn positions(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }
}
