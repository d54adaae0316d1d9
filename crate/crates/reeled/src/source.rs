//! Resolving a source video reference to a local file.

use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("source `{0}` does not exist")]
    Missing(String),
    #[error("no adapter handles source `{0}`")]
    Unresolvable(String),
    #[error("download of `{uri}` failed: {message}")]
    Download { uri: String, message: String },
}

pub fn is_remote(uri: &str) -> bool {
    uri.starts_with("http://") || uri.starts_with("https://")
}

/// Checks a source reference without fetching anything.
pub fn check_resolvable(uri: &str) -> Result<(), SourceError> {
    if is_remote(uri) {
        return Ok(());
    }
    let path = uri.strip_prefix("file://").unwrap_or(uri);
    if Path::new(path).is_file() {
        Ok(())
    } else if path.contains("://") {
        Err(SourceError::Unresolvable(uri.into()))
    } else {
        Err(SourceError::Missing(uri.into()))
    }
}

/// Returns a local path for `uri`, downloading remote videos into `work_dir`
/// with `yt-dlp`.
pub fn acquire(uri: &str, work_dir: &Path) -> Result<PathBuf, SourceError> {
    check_resolvable(uri)?;
    if !is_remote(uri) {
        return Ok(PathBuf::from(uri.strip_prefix("file://").unwrap_or(uri)));
    }
    let dest = work_dir.join("source.mp4");
    let out = Command::new("yt-dlp")
        .args(["-f", "mp4", "-o"])
        .arg(&dest)
        .arg(uri)
        .output()
        .map_err(|e| SourceError::Download { uri: uri.into(), message: e.to_string() })?;
    if !out.status.success() {
        return Err(SourceError::Download {
            uri: uri.into(),
            message: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(dest)
}
