//! Run manifest and report files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{CliConfig, CliError};
use crate::metrics::SCHEMA_VERSION;

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// What a run read and how it was configured. Thread count and timings are
/// left out so that the manifest, and every report carrying its hash, only
/// depends on things that can change results.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub config: CliConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes reports into one directory, stamping each with the manifest hash.
pub struct Output {
    dir: PathBuf,
    hash: String,
    timings: Option<BTreeMap<String, f64>>,
    started: Instant,
}

impl Output {
    pub fn create(dir: &Path, manifest: &RunManifest, timings: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
        let hash = sha256_hex(text.as_bytes());
        let out = Output { dir: dir.to_path_buf(), hash, timings: timings.then(BTreeMap::new), started: Instant::now() };
        out.write("manifest.json", &text)?;
        Ok(out)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn timing_enabled(&self) -> bool {
        self.timings.is_some()
    }

    /// Records the time since the previous stage under `stage`.
    pub fn stage(&mut self, stage: &str) {
        if let Some(t) = &mut self.timings {
            t.insert(stage.to_string(), self.started.elapsed().as_secs_f64() * 1e3);
            self.started = Instant::now();
        }
    }

    pub fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    /// JSON object with `schema_version` and `manifest_sha256` added on top.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).expect("report serializes");
        let wrapped = match v {
            serde_json::Value::Object(ref mut map) => {
                map.insert("manifest_sha256".into(), self.hash.clone().into());
                map.entry("schema_version").or_insert(SCHEMA_VERSION.into());
                v
            }
            other => serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "manifest_sha256": self.hash,
                "data": other,
            }),
        };
        self.write(name, &(serde_json::to_string_pretty(&wrapped).expect("json") + "\n"))
    }

    /// CSV text that already starts with its schema comment.
    pub fn write_csv(&self, name: &str, csv: &str) -> Result<(), CliError> {
        self.write(name, &format!("# manifest_sha256: {}\n{csv}", self.hash))
    }

    pub fn write_svg(&self, name: &str, svg: &str) -> Result<(), CliError> {
        let (head, rest) = svg.split_once('\n').unwrap_or((svg, ""));
        self.write(name, &format!("{head}\n<!-- manifest_sha256: {} -->\n{rest}", self.hash))
    }

    pub fn write_verilog(&self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, &format!("// manifest_sha256: {}\n{text}", self.hash))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.stage("write");
        if let Some(t) = &self.timings {
            self.write("timings.json", &(serde_json::to_string_pretty(t).expect("json") + "\n"))?;
        }
        Ok(())
    }
}
