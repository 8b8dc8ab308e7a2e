//! Privacy-preserving similar-patient search over encrypted SNP indices.
//!
//! Hospitals turn each patient's SNP list into a Bloom filter, re-key the set
//! bit positions through a two-layer PRF into a single-hash "customized"
//! Bloom filter, and sign the result. The cloud service (CSP) clusters those
//! filters into an OR-tree, merges trees across hospitals, and answers
//! threshold/top-k similarity queries by pruned breadth-first traversal.
//! Affiliated sensitive information (ASI) is wrapped twice under AES-GCM and
//! the inner key is sealed with an AND-policy CP-ABE whose attributes can
//! only be reproduced from client tokens after pairing-based adjustment.
//!
//! This crate is `no_std` + `alloc`: it holds the algorithms and canonical
//! byte encodings only. File formats, the service runtime and the CLI live in
//! the `privsnp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod abe;
pub mod client;
pub mod csp;
mod encoding;
mod error;
pub mod filters;
pub mod hospital;
pub mod indexing;
pub mod params;
pub mod primitives;

pub use encoding::{Reader, Writer};
pub use error::{Error, Result};
