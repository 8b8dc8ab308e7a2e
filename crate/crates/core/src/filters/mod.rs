//! Bloom filters and the similarity scores computed over them.

mod bits;
mod bloom;
mod cbf;
mod similarity;

pub use bits::{BitArray, Ones};
pub use bloom::{BloomParams, StandardBloomFilter};
pub use cbf::{CbfParams, CustomizedBloomFilter};
pub use similarity::{containment, cosine, dot_count, similarity, SimilarityMode, SimilarityScore};
