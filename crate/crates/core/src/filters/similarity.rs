use super::cbf::CustomizedBloomFilter;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityMode {
    /// `dot / (sqrt|a| sqrt|b|)` over 0/1 vectors.
    Cosine,
    /// `dot / |q|`: share of the query's bits present in the target.
    Containment,
    /// Raw `popcount(a AND b)`.
    DotCount,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityScore {
    pub mode: SimilarityMode,
    pub value: f64,
}

pub fn dot_count(a: &CustomizedBloomFilter, b: &CustomizedBloomFilter) -> Result<usize> {
    a.and_count(b)
}

pub fn cosine(a: &CustomizedBloomFilter, b: &CustomizedBloomFilter) -> Result<f64> {
    let dot = a.and_count(b)?;
    cosine_from_counts(dot, a.count_ones(), b.count_ones())
}

pub(crate) fn cosine_from_counts(dot: usize, pa: usize, pb: usize) -> Result<f64> {
    if pa == 0 || pb == 0 {
        return Err(Error::ZeroFilter);
    }
    // The product is exact in u64 and sqrt is correctly rounded, so perfect
    // squares give exact results and cosine(a, a) == 1.
    let denom = libm::sqrt((pa as u64 * pb as u64) as f64);
    Ok((dot as f64 / denom).min(1.0))
}

pub fn containment(query: &CustomizedBloomFilter, target: &CustomizedBloomFilter) -> Result<f64> {
    let dot = query.and_count(target)?;
    let q = query.count_ones();
    if q == 0 {
        return Err(Error::ZeroFilter);
    }
    Ok(dot as f64 / q as f64)
}

pub fn similarity(a: &CustomizedBloomFilter, b: &CustomizedBloomFilter, mode: SimilarityMode) -> Result<SimilarityScore> {
    let value = match mode {
        SimilarityMode::Cosine => cosine(a, b)?,
        SimilarityMode::Containment => containment(a, b)?,
        SimilarityMode::DotCount => dot_count(a, b)? as f64,
    };
    Ok(SimilarityScore { mode, value })
}
