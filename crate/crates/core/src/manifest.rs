//! Sidecar manifests recording how an artifact was produced.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::sampling::GenSpec;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full generation spec for dataset artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GenSpec>,
    /// Any other parameters of the command.
    #[serde(default)]
    pub params: serde_json::Value,
    pub wall_clock_secs: f64,
    pub created_unix: u64,
    pub output: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            spec: None,
            params: serde_json::Value::Null,
            wall_clock_secs: 0.0,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            output: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(
            path,
            serde_json::to_vec_pretty(self).expect("manifest serializes"),
        )?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| crate::Error::Format(format!("manifest {}: {e}", path.display())))
    }
}

/// `data.bin` → `data.bin.manifest.json`.
pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
