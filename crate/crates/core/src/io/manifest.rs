use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IoError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path as named in the config.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads input files and records the hash of each one. All pipeline input
/// goes through here so the manifest covers every file opened.
#[derive(Debug, Clone, Default)]
pub struct InputLog {
    base: PathBuf,
    files: BTreeMap<String, FileDigest>,
}

impl InputLog {
    /// Relative paths resolve against `base`.
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self {
            base: base.into(),
            files: BTreeMap::new(),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<String, IoError> {
        let full = self.resolve(path);
        let bytes = std::fs::read(&full).map_err(|e| IoError::file(&full, e))?;
        let text = String::from_utf8(bytes).map_err(|e| IoError::file(&full, e))?;
        self.record(path, text.as_bytes());
        Ok(text)
    }

    /// Records content that was read by other means.
    pub fn record(&mut self, path: &Path, bytes: &[u8]) {
        let key = path.to_string_lossy().replace('\\', "/");
        self.files.insert(
            key.clone(),
            FileDigest {
                path: key,
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            },
        );
    }

    pub fn insert(&mut self, digest: FileDigest) {
        self.files.insert(digest.path.clone(), digest);
    }

    pub fn digests(&self) -> Vec<FileDigest> {
        self.files.values().cloned().collect()
    }
}

/// Run record written next to the report tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    /// Report files, excluding the manifest.
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
