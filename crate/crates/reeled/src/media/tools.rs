use std::env;
use std::path::{Path, PathBuf};

use super::MediaError;

/// Directory holding `ffmpeg` (and optionally `ffprobe`), overriding `PATH`.
pub const TOOL_DIR_VAR: &str = "REELED_MEDIA_TOOL_DIR";

/// Resolved tool binaries.
///
/// `ffprobe` is optional: without it probing falls back to reading the
/// stream summary `ffmpeg -i` prints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediaTools {
    pub ffmpeg: PathBuf,
    pub ffprobe: Option<PathBuf>,
}

impl MediaTools {
    /// Looks in `REELED_MEDIA_TOOL_DIR` when set, otherwise on `PATH`.
    pub fn locate() -> Result<Self, MediaError> {
        match env::var_os(TOOL_DIR_VAR) {
            Some(dir) if !dir.is_empty() => Self::in_dirs(&[PathBuf::from(dir)]),
            _ => {
                let dirs: Vec<PathBuf> = env::var_os("PATH").map(|p| env::split_paths(&p).collect()).unwrap_or_default();
                Self::in_dirs(&dirs)
            }
        }
    }

    pub fn in_dirs(dirs: &[PathBuf]) -> Result<Self, MediaError> {
        let find = |name: &str| dirs.iter().map(|d| d.join(name)).find(|p| is_executable(p));
        let ffmpeg = find("ffmpeg").ok_or_else(|| MediaError::ToolNotFound {
            tool: "ffmpeg",
            searched: dirs.iter().map(|d| d.display().to_string()).collect::<Vec<_>>().join(":"),
        })?;
        Ok(Self { ffmpeg, ffprobe: find("ffprobe") })
    }
}

#[cfg(unix)]
fn is_executable(p: &Path) -> bool {
    use std::os::unix::fs::PermissionsExt;
    p.metadata().map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0).unwrap_or(false)
}

#[cfg(not(unix))]
fn is_executable(p: &Path) -> bool {
    p.is_file() || p.with_extension("exe").is_file()
}
