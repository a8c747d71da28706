use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::PipelineConfig;
use crate::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_bytes(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    /// File name for inputs, path relative to the output directory for outputs.
    pub path: String,
    pub sha256: String,
}

/// Record of one command run. Everything except `timings_ms` is a pure
/// function of the inputs and the configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: PipelineConfig,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub warnings: Vec<String>,
    pub stats: BTreeMap<String, serde_json::Value>,
    pub timings_ms: BTreeMap<String, f64>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            stats: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        let sha256 = sha256_file(path)?;
        self.inputs.push(FileRecord { path: name, sha256 });
        Ok(())
    }

    /// Writes `bytes` to `out/name` and records it.
    pub fn write_output(&mut self, out: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.record_output(out, name)
    }

    /// Records a file already written to `out/name`.
    pub fn record_output(&mut self, out: &Path, name: &str) -> Result<()> {
        let sha256 = sha256_file(&out.join(name))?;
        self.outputs.push(FileRecord {
            path: name.to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn stat(&mut self, key: &str, value: impl Serialize) {
        self.stats
            .insert(key.to_string(), serde_json::to_value(value).expect("stat serializes"));
    }

    /// Runs `f`, recording its wall time under `stage`, and labels its error.
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage));
        self.timings_ms.insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    /// Writes `manifest.json` into `out`. The manifest lists itself last
    /// without a hash.
    pub fn finish(mut self, out: &Path) -> Result<RunManifest> {
        self.outputs.push(FileRecord {
            path: MANIFEST_NAME.to_string(),
            sha256: String::new(),
        });
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        let path = out.join(MANIFEST_NAME);
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(self)
    }
}
