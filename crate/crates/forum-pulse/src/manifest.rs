//! Run manifest: what ran, with which parameters, on which inputs, and what
//! it produced.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::formats::{read_json, sha256_hex, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ARTIFACTS_DIR: &str = "artifacts";

/// A project directory: `manifest.json` at the root and every stage output
/// under `artifacts/`.
#[derive(Debug, Clone)]
pub struct Project {
    root: PathBuf,
}

impl Project {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> PathBuf {
        self.root.join(ARTIFACTS_DIR)
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.artifacts().join(name)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn ensure(&self) -> Result<()> {
        let dir = self.artifacts();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub params: Value,
    /// Digest over stage name, parameters and input digests.
    pub fingerprint: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Effective configuration after flags were applied.
    pub config: Value,
    pub config_sha256: Option<String>,
    pub created_at: String,
    pub updated_at: String,
    /// Latest record per stage, in first-run order.
    pub stages: Vec<StageRecord>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn fingerprint(stage: &str, params: &Value, inputs: &[FileDigest]) -> String {
    let doc = serde_json::json!({ "stage": stage, "params": params, "inputs": inputs });
    sha256_hex(doc.to_string().as_bytes())
}

impl RunManifest {
    pub fn new() -> Self {
        let t = now();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config: Value::Object(Default::default()),
            config_sha256: None,
            created_at: t.clone(),
            updated_at: t,
            stages: Vec::new(),
        }
    }

    pub fn load_or_new(path: &Path) -> Result<Self> {
        if path.exists() {
            read_json(path)
        } else {
            Ok(Self::new())
        }
    }

    pub fn save(&mut self, path: &Path) -> Result<()> {
        self.updated_at = now();
        write_json(path, self)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn record(&mut self, rec: StageRecord) {
        match self.stages.iter_mut().find(|s| s.stage == rec.stage) {
            Some(slot) => *slot = rec,
            None => self.stages.push(rec),
        }
    }

    /// Output digests of every stage, keyed by stage then path.
    pub fn output_digests(&self) -> Vec<(String, String, String)> {
        self.stages
            .iter()
            .flat_map(|s| {
                s.outputs
                    .iter()
                    .map(|o| (s.stage.clone(), o.path.clone(), o.sha256.clone()))
            })
            .collect()
    }
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}
