//! Run manifests written next to every output file.

use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
    /// Seconds since the Unix epoch when the run started.
    pub started_at: u64,
    pub wall_clock_secs: f64,
    pub output: String,
    pub content_hash: String,
}

/// Object id of `content` as git computes it with SHA-256 object format:
/// the hash of `blob <len>\0` followed by the bytes.
pub fn git_blob_sha256(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    format!("sha256:{:x}", h.finalize())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub struct Clock {
    started: SystemTime,
}

impl Clock {
    pub fn start() -> Self {
        Clock { started: SystemTime::now() }
    }

    fn started_at(&self) -> u64 {
        self.started.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs()
    }

    fn elapsed(&self) -> f64 {
        self.started.elapsed().unwrap_or(Duration::ZERO).as_secs_f64()
    }
}

/// Writes `content` to `path` and the manifest beside it.
pub fn write_with_manifest(
    path: &Path,
    content: &[u8],
    command: &str,
    master_seed: u64,
    config: serde_json::Value,
    notes: Vec<String>,
    clock: &Clock,
) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        master_seed,
        config,
        notes,
        started_at: clock.started_at(),
        wall_clock_secs: clock.elapsed(),
        output: path.display().to_string(),
        content_hash: git_blob_sha256(content),
    };
    let mpath = manifest_path(path);
    let json = serde_json::to_vec_pretty(&manifest)?;
    std::fs::write(&mpath, json).map_err(|e| CliError::io(mpath.display().to_string(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git() {
        // `git hash-object --object-format=sha256` of an empty file.
        assert_eq!(
            git_blob_sha256(b""),
            "sha256:473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest.json"));
    }
}
