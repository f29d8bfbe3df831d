use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records every file written to it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    /// Refuses a non-empty directory unless `force` is set.
    pub fn create(root: &Path, force: bool) -> Result<Self, CliError> {
        let io = |source| CliError::Io {
            path: root.to_path_buf(),
            source,
        };
        if root.exists() {
            let non_empty = fs::read_dir(root).map_err(io)?.next().is_some();
            if non_empty && !force {
                return Err(CliError::OutputExists(root.to_path_buf()));
            }
        }
        fs::create_dir_all(root).map_err(io)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `name` (relative, `/`-separated) through `f`.
    pub fn write<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>,
    {
        let path = self.root.join(name);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let mut w = BufWriter::new(fs::File::create(&path).map_err(io)?);
        f(&mut w)?;
        w.flush().map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let path = self.root.join(name);
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)
                .map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e.into(),
                })?;
            writeln!(w).map_err(|source| CliError::Io { path, source })
        })
    }

    /// Writes `manifest.json` listing every file with its SHA-256.
    pub fn finish(self, mut manifest: Value) -> Result<(), CliError> {
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let path = self.root.join(name);
            let bytes = fs::read(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            files.push(json!({
                "path": name,
                "bytes": bytes.len(),
                "sha256": sha256_hex(&bytes),
            }));
        }
        manifest["files"] = Value::Array(files);
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })
    }
}
