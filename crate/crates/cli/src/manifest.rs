//! Run manifests: everything needed to reproduce a result file.

use std::path::Path;

use lmax_core::io::{emit_instance, read_instance, InstanceFormat};
use lmax_core::Instance;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Command;
use crate::error::{CliError, Result};

pub const TOOL: &str = "lmax";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An instance as it was read, with a copy of its jobs so a replay does not
/// depend on the file still being there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub path: String,
    /// SHA-256 of the canonical object form.
    pub sha256: String,
    pub instance: Instance,
}

impl InstanceRecord {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let instance = read_instance(path)?;
        Ok(InstanceRecord::new(path.display().to_string(), instance))
    }

    pub fn new(path: String, instance: Instance) -> Self {
        InstanceRecord { sha256: digest(&instance), path, instance }
    }

    pub fn verify(&self) -> Result<()> {
        if digest(&self.instance) != self.sha256 {
            return Err(CliError::Manifest(format!("instance {} does not match its recorded digest", self.path)));
        }
        Ok(())
    }
}

pub fn digest(instance: &Instance) -> String {
    let bytes = Sha256::digest(emit_instance(instance, InstanceFormat::Object).as_bytes());
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// The only field allowed to differ between a run and its replay.
    pub timestamp: String,
    pub seed: Option<u64>,
    pub command: Command,
    pub instances: Vec<InstanceRecord>,
}

impl RunManifest {
    pub fn new(command: Command, instances: Vec<InstanceRecord>) -> Self {
        RunManifest {
            tool: TOOL.to_owned(),
            version: VERSION.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed: command.seed(),
            command,
            instances,
        }
    }

    /// Accepts a bare manifest or a result object carrying one under
    /// `"manifest"`.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Manifest(e.to_string()))?;
        let value = match value.get("manifest") {
            Some(inner) => inner.clone(),
            None => value,
        };
        let manifest: RunManifest = serde_json::from_value(value).map_err(|e| CliError::Manifest(e.to_string()))?;
        if manifest.tool != TOOL {
            return Err(CliError::Manifest(format!("written by {:?}, not {TOOL}", manifest.tool)));
        }
        for record in &manifest.instances {
            record.verify()?;
        }
        Ok(manifest)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))?;
        RunManifest::parse(&text)
    }
}
