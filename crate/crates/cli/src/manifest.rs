//! Replayable run manifests.
//!
//! Every artifact-producing command writes a `manifest.json` capturing the
//! tool version, the fully resolved configuration (hashed), and the files
//! it produced. `levelgen replay --manifest <file>` re-executes the run
//! from that record alone; with unchanged inputs the outputs are
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    /// Files produced, relative to the manifest's directory.
    pub outputs: Vec<String>,
    /// Command-specific extras (per-level RNG streams, skip lists, ...).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, config: &C) -> Result<Manifest> {
        let config = serde_json::to_value(config).context("serializing config")?;
        let canonical = serde_json::to_string(&config)?;
        Ok(Manifest {
            tool: "levelgen".to_string(),
            version: crate::tool_version().to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(canonical.as_bytes()),
            config,
            outputs: Vec::new(),
            details: serde_json::Value::Null,
        })
    }

    pub fn push_output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn set_details<D: Serialize>(&mut self, details: &D) -> Result<()> {
        self.details = serde_json::to_value(details)?;
        Ok(())
    }

    /// Writes `manifest.json` inside `dir`.
    pub fn write_in(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        serde_json::from_str(
            &fs::read_to_string(path)
                .with_context(|| format!("reading manifest {}", path.display()))?,
        )
        .with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn config_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_value(self.config.clone()).context("decoding manifest config")
    }
}

/// Manifest path for a single-file artifact: `<file>.manifest.json`.
pub fn sibling_path(artifact: &Path) -> PathBuf {
    let mut os = artifact.as_os_str().to_owned();
    os.push(".manifest.json");
    PathBuf::from(os)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Cfg {
        corpus: String,
        seed: u64,
    }

    #[test]
    fn manifest_round_trips_and_hashes_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = Cfg { corpus: "corpus".into(), seed: 42 };
        let mut m = Manifest::new("train", &cfg).unwrap();
        m.push_output("report.json");
        let path = m.write_in(dir.path()).unwrap();
        let back = Manifest::read(&path).unwrap();
        assert_eq!(back.command, "train");
        assert_eq!(back.outputs, vec!["report.json".to_string()]);
        assert_eq!(back.config_as::<Cfg>().unwrap(), cfg);
        assert_eq!(back.config_sha256.len(), 64);
        assert_eq!(back.config_sha256, m.config_sha256);

        let other = Manifest::new("train", &Cfg { corpus: "corpus".into(), seed: 43 }).unwrap();
        assert_ne!(other.config_sha256, m.config_sha256);
    }
}
