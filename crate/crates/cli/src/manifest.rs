use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one command run, written as `<out>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Every option after defaults were applied.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub tool_version: String,
    pub timestamp: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, inputs: &[&Path]) -> Result<Self> {
        let mut digests = Vec::new();
        for path in inputs {
            digest_into(path, &mut digests)?;
        }
        Ok(RunManifest {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            inputs: digests,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            summary: None,
        })
    }

    pub fn with_summary<S: Serialize>(mut self, summary: &S) -> Result<Self> {
        self.summary = Some(serde_json::to_value(summary)?);
        Ok(self)
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write_next_to(&self, out: &Path) -> Result<()> {
        let path = Self::path_for(out);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| CliError::Write { path, source })
    }
}

/// Hashes a file, or every file below a directory in path order.
fn digest_into(path: &Path, out: &mut Vec<InputDigest>) -> Result<()> {
    let read_err = |source| CliError::Read {
        path: path.to_path_buf(),
        source,
    };
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(read_err)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()
            .map_err(read_err)?;
        entries.sort();
        for entry in entries {
            digest_into(&entry, out)?;
        }
        return Ok(());
    }
    let bytes = fs::read(path).map_err(read_err)?;
    out.push(InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    Ok(())
}
