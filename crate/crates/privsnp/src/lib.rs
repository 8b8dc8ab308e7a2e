//! Hospital, CSP and client tooling around `privsnp-core`: file formats,
//! key and dataset files, the CSP service and its TCP transport, synthetic
//! data, the plaintext oracle and the benchmark harness.

pub mod b64;
pub mod bench;
pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod keys;
pub mod net;
pub mod oracle;
pub mod service;
pub mod stats;
pub mod synth;
pub mod wire;
pub mod workspace;

pub use error::{Error, Result};

/// Population statistics shipped with the crate.
pub const DEFAULT_STATS: &str = include_str!("../data/snp_stats.tsv");
