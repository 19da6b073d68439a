//! Atomic file writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const MANIFEST_SCHEMA: &str = "sqg.manifest.v1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `bytes` to a hidden temporary file next to `path`, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub category: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: &'static str,
    pub tool_version: &'static str,
    pub config_hash: String,
    pub config: Value,
    pub datum: Option<Value>,
    pub solver: Option<Value>,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub status: &'static str,
    pub error: Option<ErrorInfo>,
}

/// Collects outputs of one command and writes the manifest last.
pub struct Session {
    dir: PathBuf,
    started: Instant,
    started_unix: f64,
    outputs: Vec<String>,
}

impl Session {
    pub fn start(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0.0, |d| d.as_secs_f64()),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn finish(
        self,
        command: &'static str,
        loaded: (&Value, &str),
        error: Option<ErrorInfo>,
    ) -> std::io::Result<()> {
        let (config, hash) = loaded;
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA,
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            config_hash: hash.to_string(),
            config: config.clone(),
            datum: config.get("datum").cloned(),
            solver: config.get("solver").cloned(),
            outputs: self.outputs.clone(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            status: if error.is_none() { "completed" } else { "failed" },
            error,
        };
        let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST_FILE), &bytes)
    }
}
