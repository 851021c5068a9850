//! Report manifest: every command ends by writing `manifest.json`, listing
//! each emitted file with its size and content hash next to the fully
//! resolved configuration, so a report is self-describing and any
//! byte-level difference between reruns is attributable.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::WorkbenchConfig;
use crate::CliError;

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config: &'a WorkbenchConfig,
    files: Vec<FileEntry>,
}

/// Write `out_dir/manifest.json` covering `files` (paths relative to
/// `out_dir`, listed sorted). Returns the manifest's own path.
pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &WorkbenchConfig,
    files: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let mut entries = Vec::with_capacity(files.len());
    for rel in files {
        let full = out_dir.join(rel);
        let data = std::fs::read(&full)
            .map_err(|e| CliError::Runtime(format!("manifest: cannot read {rel:?}: {e}")))?;
        entries.push(FileEntry {
            path: rel.to_string_lossy().into_owned(),
            bytes: data.len() as u64,
            sha256: hex(&Sha256::digest(&data)),
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { command, seed: config.seed, config, files: entries };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Runtime(format!("manifest: serialization failed: {e}")))?;
    text.push('\n');
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, text)
        .map_err(|e| CliError::Runtime(format!("manifest: cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn hex(digest: &[u8]) -> String {
    let mut out = String::with_capacity(digest.len() * 2);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Write one output file under `out_dir` and record it in `files`.
pub fn emit(
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
    rel: impl Into<PathBuf>,
    content: impl AsRef<[u8]>,
) -> Result<(), CliError> {
    let rel = rel.into();
    let full = out_dir.join(&rel);
    if let Some(parent) = full.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(&full, content.as_ref())
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", full.display())))?;
    files.push(rel);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_hashes_known_content() {
        let dir = std::env::temp_dir().join(format!("vqos-manifest-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut files = Vec::new();
        emit(&dir, &mut files, "b.csv", "x,y\n").unwrap();
        emit(&dir, &mut files, "a.csv", "hello").unwrap();
        let cfg = WorkbenchConfig::default();
        let path = write_manifest(&dir, "test", &cfg, &files).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let listed = value["files"].as_array().unwrap();
        // Sorted by path, with the documented SHA-256 of "hello".
        assert_eq!(listed[0]["path"], "a.csv");
        assert_eq!(
            listed[0]["sha256"],
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
        assert_eq!(listed[1]["path"], "b.csv");
        assert_eq!(listed[1]["bytes"], 4);
        assert_eq!(value["command"], "test");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
