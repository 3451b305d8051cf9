//! Artifact writing confined to an output directory, with a content-hash
//! manifest.

use std::fs;
use std::path::{Component, Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reject absolute paths and anything that is not a plain name segment.
pub fn check_relative(rel: &Path) -> Result<()> {
    let plain = rel.components().all(|c| matches!(c, Component::Normal(_)));
    if plain && rel.components().next().is_some() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "artifact path {} escapes the output directory",
            rel.display()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes artifacts under `root` and records each one's hash.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    entries: Vec<Entry>,
    notes: Vec<(String, String)>,
}

impl ArtifactWriter {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(ArtifactWriter {
            root,
            entries: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `bytes` at `rel` (slash-separated) and read it back to confirm.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let rel_path = Path::new(rel);
        check_relative(rel_path)?;
        if rel == MANIFEST_NAME || self.entries.iter().any(|e| e.path == rel) {
            return Err(CliError::Validation(format!(
                "artifact {rel} written twice"
            )));
        }
        let full = self.root.join(rel_path);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&full, bytes).map_err(|e| CliError::io(&full, e))?;
        let back = fs::read(&full).map_err(|e| CliError::io(&full, e))?;
        if back != bytes {
            return Err(CliError::Validation(format!(
                "{} did not read back intact",
                full.display()
            )));
        }
        self.entries.push(Entry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// A `key=value` line recorded in the manifest header.
    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Render the manifest: `# key=value` notes, then `sha256  bytes  path`
    /// sorted by path.
    pub fn manifest_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        for e in entries {
            out.push_str(&format!("{}  {}  {}\n", e.sha256, e.bytes, e.path));
        }
        out
    }

    /// Write the manifest last, after every artifact is on disk.
    pub fn finish(self) -> Result<Manifest> {
        let text = self.manifest_text();
        let path = self.root.join(MANIFEST_NAME);
        fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
        Ok(Manifest {
            path,
            entries: self.entries,
            notes: self.notes,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub path: PathBuf,
    pub entries: Vec<Entry>,
    pub notes: Vec<(String, String)>,
}

impl Manifest {
    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}
