//! Run manifest: stage outcomes and a content hash for every artifact.
//!
//! The manifest holds nothing that varies between identical runs (no
//! timestamps, host names, thread counts or absolute paths), so two runs
//! of the same scenario and seed produce the same bytes.

use crate::error::PipelineError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub stage: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub raster_format_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub config_sha256: String,
    pub stages: Vec<StageRecord>,
    /// Sorted by path.
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn hash_file(path: &Path) -> Result<(u64, String), PipelineError> {
    let data = std::fs::read(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    Ok((data.len() as u64, sha256_hex(&data)))
}

impl RunManifest {
    pub fn new(scenario: &str, seed: u64, config_json: &str) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: concat!("sarpipe ", env!("CARGO_PKG_VERSION")).into(),
            raster_format_version: sar_core::io::FORMAT_VERSION,
            scenario: scenario.into(),
            seed,
            config_sha256: sha256_hex(config_json.as_bytes()),
            stages: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn load(dir: &Path) -> Result<Option<Self>, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| PipelineError::Io(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
        Ok(())
    }

    /// Replace the record of `stage`, keeping pipeline order.
    pub fn record(&mut self, rec: StageRecord) {
        self.stages.retain(|s| s.stage != rec.stage);
        self.stages.push(rec);
        let order = |name: &str| {
            crate::config::Stage::ALL
                .iter()
                .position(|s| s.name() == name)
                .unwrap_or(usize::MAX)
        };
        self.stages.sort_by_key(|s| order(&s.stage));
    }

    /// Hash `rel` (relative to `dir`) and replace any earlier entry.
    pub fn add_artifact(&mut self, dir: &Path, rel: &str, stage: &str) -> Result<(), PipelineError> {
        let (bytes, sha256) = hash_file(&dir.join(rel))?;
        self.artifacts.retain(|a| a.path != rel);
        self.artifacts.push(Artifact {
            path: rel.into(),
            stage: stage.into(),
            bytes,
            sha256,
        });
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }

    /// Entries whose file no longer matches its recorded hash.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .iter()
            .filter(|a| match hash_file(&dir.join(&a.path)) {
                Ok((n, h)) => n != a.bytes || h != a.sha256,
                Err(_) => true,
            })
            .map(|a| a.path.clone())
            .collect()
    }
}
