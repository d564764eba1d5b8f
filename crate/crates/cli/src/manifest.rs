use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Provenance written next to every output file. The data payload itself
/// never contains timing or thread information.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    /// SHA-256 of each input file, keyed by path.
    pub input_digests: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new<C: Serialize>(
        subcommand: &str,
        config: &C,
        master_seed: Option<u64>,
    ) -> Result<Self> {
        Ok(Self {
            subcommand: subcommand.to_owned(),
            config: serde_json::to_value(config)?,
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            input_digests: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        })
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.input_digests.insert(
            path.display().to_string(),
            hex::encode(Sha256::digest(bytes)),
        );
    }

    pub fn finish(mut self, elapsed: Duration) -> Self {
        self.wall_clock_seconds = elapsed.as_secs_f64();
        self
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}
