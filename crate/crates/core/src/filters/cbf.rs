use sha2::{Digest, Sha256};

use super::bits::BitArray;
use crate::error::{Error, Result};

const TAG: &[u8] = b"privsnp/cbf/v1";

/// System-wide shape of every customized Bloom filter. Filters built under
/// different parameters are not comparable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CbfParams {
    pub length_bits: u32,
    /// Key of the single position hash.
    pub seed: u64,
}

impl CbfParams {
    pub fn new(length_bits: u32, seed: u64) -> Result<Self> {
        if length_bits == 0 {
            return Err(Error::InvalidParameter("CBF length must be positive"));
        }
        Ok(Self { length_bits, seed })
    }

    pub fn position(&self, item: &[u8]) -> u32 {
        let d = Sha256::new().chain_update(TAG).chain_update(self.seed.to_le_bytes()).chain_update(item).finalize();
        (u64::from_le_bytes(d[..8].try_into().unwrap()) % u64::from(self.length_bits)) as u32
    }
}

/// Bloom filter populated through a single hash function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CustomizedBloomFilter {
    params: CbfParams,
    bits: BitArray,
}

impl CustomizedBloomFilter {
    pub fn new(params: CbfParams) -> Self {
        Self { params, bits: BitArray::new(params.length_bits).expect("length >= 1 by construction") }
    }

    pub fn from_bits(params: CbfParams, bits: BitArray) -> Result<Self> {
        if bits.len() != params.length_bits {
            return Err(Error::LengthMismatch { left: params.length_bits.into(), right: bits.len().into() });
        }
        Ok(Self { params, bits })
    }

    pub fn params(&self) -> &CbfParams {
        &self.params
    }

    pub fn bits(&self) -> &BitArray {
        &self.bits
    }

    pub fn len_bits(&self) -> u32 {
        self.params.length_bits
    }

    pub fn add(&mut self, item: &[u8]) {
        self.bits.set(self.params.position(item));
    }

    pub fn add_all<'a, I: IntoIterator<Item = &'a [u8]>>(&mut self, items: I) {
        let params = self.params;
        self.bits.extend(items.into_iter().map(move |it| params.position(it)));
    }

    pub fn contains(&self, item: &[u8]) -> bool {
        self.bits.get(self.params.position(item))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.params.length_bits != other.params.length_bits {
            return Err(Error::LengthMismatch {
                left: self.params.length_bits.into(),
                right: other.params.length_bits.into(),
            });
        }
        if self.params.seed != other.params.seed {
            return Err(Error::InvalidParameter("CBFs built with different hash seeds"));
        }
        Ok(())
    }

    /// Bitwise OR.
    pub fn or(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(Self { params: self.params, bits: self.bits.union(&other.bits)? })
    }

    /// `popcount(self AND other)`.
    pub fn and_count(&self, other: &Self) -> Result<usize> {
        self.compatible(other)?;
        self.bits.and_count(&other.bits)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.params == other.params && self.bits.is_subset_of(&other.bits)
    }
}
