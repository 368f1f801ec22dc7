//! Output plumbing: primary artifact to a file (written atomically) or to
//! stdout, sibling reports next to the primary path.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ConfigError;

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), ConfigError> {
    let err = |e: std::io::Error| ConfigError(format!("cannot write {}: {e}", path.display()));
    let file_name = path
        .file_name()
        .ok_or_else(|| ConfigError(format!("output path {} has no file name", path.display())))?;
    let mut tmp = PathBuf::from(path);
    tmp.set_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(err)?;
        f.write_all(content.as_bytes()).map_err(err)?;
        f.sync_all().map_err(err)?;
    }
    std::fs::rename(&tmp, path).map_err(err)
}

/// Primary artifact destination.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), ConfigError> {
    match path {
        Some(p) => write_atomic(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Sibling path `<primary>.<suffix>` for secondary reports.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut out = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    out.set_file_name(format!("{name}.{suffix}"));
    out
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String, ConfigError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| ConfigError(format!("serialization failed: {e}")))
}
