//! Run manifests: everything needed to reproduce a render, plus output hashes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{parse_config, ConfigError, ConfigFile, ResolvedConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL: &str = "aviary";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// True when the seed was drawn from entropy rather than supplied.
    pub seed_generated: bool,
    pub rng: String,
    /// The resolved config with every default written out.
    pub config: ConfigFile,
    pub frames: usize,
    pub sample_rate: u32,
    pub birds: usize,
    pub events: usize,
    /// Peak absolute sample of the mix before normalization.
    pub peak: f64,
    pub silent: bool,
    pub warnings: Vec<String>,
    /// File name -> lowercase hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(cfg: &ResolvedConfig) -> Self {
        Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            seed_generated: cfg.seed_generated,
            rng: aviary_core::rng::ALGORITHM.into(),
            config: cfg.to_file(),
            frames: cfg.scene.frames(),
            sample_rate: cfg.scene.sample_rate,
            birds: cfg.scene.total_birds(),
            events: 0,
            peak: 0.0,
            silent: false,
            warnings: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, file: &str, bytes: &[u8]) {
        self.outputs.insert(file.into(), sha256_hex(bytes));
    }

    /// The config this manifest was produced from. The seed is always present.
    pub fn resolved_config(&self) -> Result<ResolvedConfig, ConfigError> {
        let mut cfg = self.config.resolve(|| self.seed)?;
        cfg.seed_generated = self.seed_generated;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parse either a config file or a run manifest (whose embedded config is used).
pub fn load_config(text: &str) -> Result<ResolvedConfig, ConfigError> {
    let looks_like_manifest = serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("tool").and_then(|t| t.as_str()).map(|t| t == TOOL))
        .unwrap_or(false);
    if looks_like_manifest {
        let manifest: Manifest = serde_json::from_str(text)?;
        manifest.resolved_config()
    } else {
        parse_config(text)
    }
}
