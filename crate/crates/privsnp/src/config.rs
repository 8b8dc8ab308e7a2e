//! TOML configuration shared by every role.

use std::path::Path;

use privsnp_core::csp::SearchMode;
use privsnp_core::params::{SystemParams, DEFAULT_BF_CAPACITY, DEFAULT_BF_FP, DEFAULT_MDS_DIM};
use privsnp_core::primitives::GroupParams;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};

pub const DEFAULT_MERGE_THRESHOLD: usize = 50;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Default,
    StrictPaper,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Default => SearchMode::Default,
            Mode::StrictPaper => SearchMode::StrictPaper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bf_capacity: u64,
    pub bf_fp: f64,
    /// Defaults to the standard filter length.
    pub cbf_length: Option<u32>,
    pub cbf_seed: u64,
    pub mds_dim: usize,
    pub merge_threshold: usize,
    pub curve: String,
    pub mode: Mode,
    pub fast_merge: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bf_capacity: DEFAULT_BF_CAPACITY,
            bf_fp: DEFAULT_BF_FP,
            cbf_length: None,
            cbf_seed: 0,
            mds_dim: DEFAULT_MDS_DIM,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            curve: "bls12-381".into(),
            mode: Mode::Default,
            fast_merge: true,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.system_params()?;
        c.group()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        Self::parse(std::str::from_utf8(&bytes).map_err(|e| Error::Config(e.to_string()))?)
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        Ok(SystemParams::new(self.bf_capacity, self.bf_fp, self.cbf_length, self.cbf_seed, self.mds_dim)?)
    }

    pub fn group(&self) -> Result<GroupParams> {
        Ok(GroupParams::from_curve_id(&self.curve)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }
}
