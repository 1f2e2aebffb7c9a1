//! Run manifests: every output directory gets a `manifest.json` recording
//! the subcommand, resolved configuration, input digests, seed, and output
//! files. Reruns with equal manifests produce byte-identical outputs, so a
//! manifest is a verifiable receipt for the data next to it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Resolved configuration values, keyed by flag name (sorted).
    pub config: BTreeMap<String, serde_json::Value>,
    /// SHA-256 digests of input files, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    /// Output files written next to this manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn config(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.config.insert(key.to_string(), value.into());
        self
    }

    pub fn input_file(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(self)
    }

    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), body + "\n")?;
        Ok(())
    }
}
