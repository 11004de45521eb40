//! Output files: CSV tables, JSON documents and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Records every file written into one output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Names of the files written so far, in order.
    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    fn record(&mut self, name: &str) -> PathBuf {
        let rel = PathBuf::from(name);
        if !self.written.contains(&rel) {
            self.written.push(rel);
        }
        self.root.join(name)
    }

    /// Writes a CSV table; `header` entries carry their units in brackets.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.record(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.record(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct OutputRecord {
    pub file: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance of one run.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

impl RunManifest {
    /// Hashes every recorded file and writes `manifest.json` next to them.
    pub fn write(out: &OutputDir, command: &str, config: &ExperimentConfig, wall_time_seconds: f64) -> Result<Self> {
        let outputs = out
            .files()
            .iter()
            .map(|f| {
                let (sha256, bytes) = sha256_file(&out.root().join(f))?;
                Ok(OutputRecord { file: f.clone(), sha256, bytes })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            wall_time_seconds,
            outputs,
        };
        let path = out.root().join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}
