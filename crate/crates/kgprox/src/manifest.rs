use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kgprox_core::pipeline::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// What was run, on which inputs, with which effective settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub version: String,
    pub threads: usize,
    pub duration_seconds: f64,
}

pub fn file_digest(path: &Path) -> Result<InputDigest> {
    let mut bytes = Vec::new();
    crate::io::open(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

/// Collects manifest fields while a command runs.
#[derive(Debug)]
pub struct ManifestBuilder {
    command: Vec<String>,
    started: Instant,
    inputs: Vec<InputDigest>,
    threads: usize,
}

impl ManifestBuilder {
    pub fn start(command: Vec<String>, threads: usize) -> Self {
        ManifestBuilder {
            command,
            started: Instant::now(),
            inputs: Vec::new(),
            threads,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(file_digest(path)?);
        Ok(())
    }

    pub fn finish<C: Serialize>(self, config: &C) -> RunManifest {
        RunManifest {
            command: self.command,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            inputs: self.inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: self.threads,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// `<output>.manifest.json` beside a single-file output.
pub fn sidecar(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
