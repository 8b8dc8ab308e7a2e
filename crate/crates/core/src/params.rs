//! System-wide filter parameters agreed by every hospital and client.

use crate::filters::{BloomParams, CbfParams};
use crate::primitives::tagged_hash;
use crate::error::Result;

pub const DEFAULT_BF_CAPACITY: u64 = 1 << 21;
pub const DEFAULT_BF_FP: f64 = 0.01;
pub const DEFAULT_MDS_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub bloom: BloomParams,
    pub cbf: CbfParams,
    /// Upper bound on the MDS embedding dimension used before clustering.
    pub mds_dim: usize,
}

impl SystemParams {
    /// `cbf_length` defaults to the standard filter's bit length.
    pub fn new(capacity: u64, fp: f64, cbf_length: Option<u32>, cbf_seed: u64, mds_dim: usize) -> Result<Self> {
        let bloom = BloomParams::new(capacity, fp)?;
        let cbf = CbfParams::new(cbf_length.unwrap_or(bloom.bits), cbf_seed)?;
        if mds_dim == 0 {
            return Err(crate::Error::InvalidParameter("mds_dim must be positive"));
        }
        Ok(Self { bloom, cbf, mds_dim })
    }

    /// Digest of everything a query must agree on with the indices.
    pub fn fingerprint(&self) -> [u8; 32] {
        tagged_hash(
            b"privsnp/params/v1",
            &[
                &self.bloom.capacity.to_le_bytes(),
                &self.bloom.fp_target.to_bits().to_le_bytes(),
                &self.bloom.bits.to_le_bytes(),
                &self.bloom.hashes.to_le_bytes(),
                &self.cbf.length_bits.to_le_bytes(),
                &self.cbf.seed.to_le_bytes(),
            ],
        )
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::new(DEFAULT_BF_CAPACITY, DEFAULT_BF_FP, None, 0, DEFAULT_MDS_DIM).expect("defaults are valid")
    }
}
