//! Optional TOML configuration mirroring the command-line flags.
//!
//! ```toml
//! [oracle]
//! k = 3
//! beam = 8
//!
//! [train]
//! epochs = 2
//!
//! [summarize]
//! tau = 0.45
//! dedup = true
//!
//! [sweep]
//! tau_grid = "0:1:0.05"
//! ```
//!
//! Every key is optional; a flag given on the command line wins.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub k: Option<usize>,
    pub beam: Option<usize>,
    pub max_sents: Option<usize>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub alpha: Option<f64>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub pos_weight: Option<f64>,
    pub hidden_size: Option<usize>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarizeSection {
    pub tau: Option<f64>,
    pub k: Option<usize>,
    pub dedup: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub tau_grid: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub summarize: SummarizeSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FileConfig::parse(&text)
    }
}
