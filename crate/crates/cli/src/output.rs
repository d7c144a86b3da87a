//! Atomic artifact writes, content hashes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects every artifact written during a run.
pub struct Sink {
    dir: PathBuf,
    files: Mutex<Vec<FileEntry>>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write to a temporary sibling, then rename over the target.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            files: Mutex::new(Vec::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&self, name: &str, data: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), data.as_bytes())?;
        let mut files = self.files.lock().expect("file list lock");
        files.retain(|f| f.path != name);
        files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(data.as_bytes()),
            bytes: data.len(),
        });
        Ok(())
    }

    pub fn write_json(&self, name: &str, v: &Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, &s)
    }

    /// Sorted inventory of what has been written so far.
    pub fn inventory(&self) -> Vec<FileEntry> {
        let mut files = self.files.lock().expect("file list lock").clone();
        files.sort_by(|a, b| a.path.cmp(&b.path));
        files
    }

    /// Rename everything written so far to `<name>.partial`, after a failed run.
    pub fn mark_partial(&self) -> Vec<FileEntry> {
        let mut files = self.inventory();
        for f in &mut files {
            let from = self.dir.join(&f.path);
            let to = self.dir.join(format!("{}.partial", f.path));
            if fs::rename(&from, &to).is_ok() {
                f.path = format!("{}.partial", f.path);
            }
        }
        files
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
