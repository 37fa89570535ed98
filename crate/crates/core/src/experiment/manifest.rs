use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{file_name, ExperimentError};
use crate::config::ValidatedConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub created_unix: u64,
    pub wall_time_seconds: f64,
    pub rayon_threads: usize,
    pub files: Vec<ManifestEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Manifest {
    pub fn build(
        scenario: &str,
        cfg: &ValidatedConfig,
        dir: &Path,
        files: &[PathBuf],
        wall_time_seconds: f64,
    ) -> Result<Self, ExperimentError> {
        let mut entries = Vec::with_capacity(files.len());
        for path in files {
            let bytes = std::fs::read(path).map_err(|e| ExperimentError::io(path, e))?;
            let file = path
                .strip_prefix(dir)
                .map(|p| p.to_string_lossy().into_owned())
                .unwrap_or_else(|_| file_name(path));
            entries.push(ManifestEntry {
                file,
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(Manifest {
            scenario: scenario.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: cfg.seed,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            wall_time_seconds,
            rayon_threads: rayon::current_num_threads(),
            files: entries,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), ExperimentError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|e| ExperimentError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
