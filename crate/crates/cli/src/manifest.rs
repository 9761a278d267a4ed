//! Append-only run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub file: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub inputs: Vec<InputHash>,
    pub started: String,
    pub finished: String,
    pub summary: serde_json::Value,
    pub exit_status: i32,
    /// Checkpoint file to pass back with `--resume`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resumable: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestLog {
    pub runs: Vec<RunManifest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads data files and remembers their hashes.
#[derive(Debug, Default)]
pub struct Inputs {
    pub dir: PathBuf,
    pub hashes: Vec<InputHash>,
}

impl Inputs {
    pub fn new(dir: PathBuf) -> Inputs {
        Inputs {
            dir,
            hashes: Vec::new(),
        }
    }

    pub fn read(&mut self, name: &str) -> Result<String, String> {
        let path = self.dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| format!("missing data file {}: {e}", path.display()))?;
        let hash = sha256_hex(&bytes);
        if !self.hashes.iter().any(|h| h.file == path) {
            self.hashes.push(InputHash { file: path.clone(), sha256: hash });
        }
        String::from_utf8(bytes).map_err(|_| format!("{} is not UTF-8", path.display()))
    }
}

pub const MANIFEST: &str = "manifest.json";

pub fn load_manifest(dir: &Path) -> Result<ManifestLog, String> {
    let path = dir.join(MANIFEST);
    match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| format!("malformed {}: {e}", path.display())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ManifestLog::default()),
        Err(e) => Err(format!("cannot read {}: {e}", path.display())),
    }
}

/// Append a run to `dir/manifest.json`, keeping every earlier entry.
pub fn write_manifest(dir: &Path, run: RunManifest) -> Result<ManifestLog, String> {
    let mut log = load_manifest(dir)?;
    log.runs.push(run);
    let text = serde_json::to_string_pretty(&log).expect("manifest serializes") + "\n";
    let tmp = dir.join("manifest.json.tmp");
    std::fs::write(&tmp, text).map_err(|e| format!("cannot write {}: {e}", tmp.display()))?;
    std::fs::rename(&tmp, dir.join(MANIFEST)).map_err(|e| format!("cannot write manifest: {e}"))?;
    Ok(log)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashMismatch {
    pub file: PathBuf,
    pub recorded: String,
    /// `None` when the file is gone.
    pub current: Option<String>,
}

/// Re-hash every input recorded in the manifest.
pub fn verify_manifest(dir: &Path) -> Result<Vec<HashMismatch>, String> {
    let log = load_manifest(dir)?;
    let mut out = Vec::new();
    for run in &log.runs {
        for h in &run.inputs {
            let current = std::fs::read(&h.file).ok().map(|b| sha256_hex(&b));
            if current.as_deref() != Some(h.sha256.as_str()) && !out.iter().any(|m: &HashMismatch| m.file == h.file) {
                out.push(HashMismatch {
                    file: h.file.clone(),
                    recorded: h.sha256.clone(),
                    current,
                });
            }
        }
    }
    Ok(out)
}
