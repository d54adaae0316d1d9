//! Reading caption files and fetching remote ones.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use reeled_core::transcript::{normalize, parse_captions, CaptionFormat, Transcript, TranscriptError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaptionLoadError {
    #[error("cannot read captions {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("captions {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: TranscriptError,
    },
    #[error("caption download failed: {0}")]
    Fetch(String),
}

/// Format hint from a file extension; content sniffing decides otherwise.
pub fn format_for(path: &Path) -> CaptionFormat {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("srt") => CaptionFormat::Srt,
        Some("vtt") => CaptionFormat::Vtt,
        _ => CaptionFormat::Auto,
    }
}

/// Reads, parses and normalizes a caption file. The source id is the file
/// stem.
pub fn load_captions(path: &Path) -> Result<Transcript, CaptionLoadError> {
    let raw = fs::read(path).map_err(|source| CaptionLoadError::Io { path: path.to_owned(), source })?;
    let parse_err = |source| CaptionLoadError::Parse { path: path.to_owned(), source };
    let t = parse_captions(&raw, format_for(path)).map_err(parse_err)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("captions");
    Ok(normalize(&t).map_err(parse_err)?.with_source_id(stem))
}

/// Anything that can produce a caption file for a video reference.
pub trait CaptionSource {
    fn fetch(&self, video_ref: &str, dest_dir: &Path) -> Result<PathBuf, CaptionLoadError>;
}

/// Downloads subtitles of an online video with `yt-dlp`.
///
/// Optional: nothing in the pipeline needs it when captions are local.
#[derive(Debug, Clone)]
pub struct YtDlpCaptions {
    pub program: PathBuf,
    pub language: String,
}

impl Default for YtDlpCaptions {
    fn default() -> Self {
        Self {
            program: PathBuf::from("yt-dlp"),
            language: "en".into(),
        }
    }
}

impl CaptionSource for YtDlpCaptions {
    fn fetch(&self, video_ref: &str, dest_dir: &Path) -> Result<PathBuf, CaptionLoadError> {
        let template = dest_dir.join("captions.%(ext)s");
        let out = Command::new(&self.program)
            .args(["--skip-download", "--write-subs", "--write-auto-subs", "--sub-format", "vtt", "--sub-langs"])
            .arg(&self.language)
            .arg("-o")
            .arg(&template)
            .arg(video_ref)
            .output()
            .map_err(|e| CaptionLoadError::Fetch(format!("{}: {e}", self.program.display())))?;
        if !out.status.success() {
            return Err(CaptionLoadError::Fetch(String::from_utf8_lossy(&out.stderr).trim().to_string()));
        }
        let found = fs::read_dir(dest_dir)
            .map_err(|e| CaptionLoadError::Fetch(e.to_string()))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .find(|p| p.extension().is_some_and(|e| e == "vtt"));
        found.ok_or_else(|| CaptionLoadError::Fetch("no subtitle track was written".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_hints() {
        assert_eq!(format_for(Path::new("a/b.SRT")), CaptionFormat::Srt);
        assert_eq!(format_for(Path::new("x.vtt")), CaptionFormat::Vtt);
        assert_eq!(format_for(Path::new("x.txt")), CaptionFormat::Auto);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_captions(Path::new("/nonexistent/lecture.vtt")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/lecture.vtt"));
    }
}
