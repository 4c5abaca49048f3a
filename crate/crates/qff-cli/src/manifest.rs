//! Run manifests: every output file gets a sibling `<name>.manifest.json`
//! recording the subcommand, input paths, resolved parameters, tool version
//! and a sha256 per output. Identical inputs produce identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub params: serde_json::Value,
    pub tool_version: &'static str,
    /// file name -> sha256 of the written bytes
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, inputs: &[&Path], params: serde_json::Value) -> Self {
        Self {
            subcommand,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            params,
            tool_version: env!("CARGO_PKG_VERSION"),
            outputs: BTreeMap::new(),
        }
    }

    /// Write one output file and record its checksum.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let digest = Sha256::digest(bytes);
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.insert(name, hex::encode(digest));
        Ok(())
    }

    /// Write the manifest next to the primary output.
    pub fn finish(&self, primary_out: &Path) -> Result<()> {
        let path = manifest_path(primary_out);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    out.with_file_name(name)
}
