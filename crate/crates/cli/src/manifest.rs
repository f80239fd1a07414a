//! Reproduction manifests written next to every output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_VERSION: &str = "torsionlab-manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub version: String,
    pub tool: String,
    pub tool_version: String,
    /// Arguments after the program name; rerunning them reproduces the
    /// outputs listed below.
    pub argv: Vec<String>,
    pub command: String,
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digest(path: &Path) -> Result<FileDigest, CliError> {
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

impl ExperimentManifest {
    pub fn new(argv: &[String], command: &str, parameters: serde_json::Value, master_seed: Option<u64>) -> Self {
        Self {
            version: MANIFEST_VERSION.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            argv: argv.to_vec(),
            command: command.to_string(),
            parameters,
            master_seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, paths: &[&Path]) -> Result<Self, CliError> {
        for p in paths {
            self.inputs.push(digest(p)?);
        }
        Ok(self)
    }

    /// Digest `outputs` and write the manifest to `path`.
    pub fn write(mut self, path: &Path, outputs: &[PathBuf]) -> Result<(), CliError> {
        for p in outputs {
            self.outputs.push(digest(p)?);
        }
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Internal(e.to_string()))?;
        crate::write_file(path, text.as_bytes())
    }
}

/// `DIR/manifest.json` for directory outputs, `FILE.manifest.json` for files.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}
