use std::path::Path;
use std::process::Command;

use serde_json::Value;

use super::{MediaError, MediaTools};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeInfo {
    pub duration_ms: u64,
    pub has_video: bool,
    pub has_audio: bool,
}

/// Container duration and stream presence of `path`.
pub fn probe(tools: &MediaTools, path: &Path) -> Result<ProbeInfo, MediaError> {
    if !path.is_file() {
        return Err(MediaError::ToolFailure {
            tool: "probe".into(),
            path: path.to_owned(),
            stderr: "no such file".into(),
        });
    }
    match &tools.ffprobe {
        Some(ffprobe) => probe_json(ffprobe, path),
        None => probe_banner(&tools.ffmpeg, path),
    }
}

fn failure(tool: &Path, path: &Path, stderr: &[u8]) -> MediaError {
    let stderr = String::from_utf8_lossy(stderr).trim().to_string();
    if stderr.contains("Invalid data found") {
        MediaError::NotMedia(path.to_owned())
    } else {
        MediaError::ToolFailure { tool: tool.display().to_string(), path: path.to_owned(), stderr }
    }
}

fn probe_json(ffprobe: &Path, path: &Path) -> Result<ProbeInfo, MediaError> {
    let out = Command::new(ffprobe)
        .args(["-v", "error", "-print_format", "json", "-show_format", "-show_streams"])
        .arg(path)
        .output()
        .map_err(|e| MediaError::io(ffprobe, e))?;
    if !out.status.success() {
        return Err(failure(ffprobe, path, &out.stderr));
    }
    parse_probe_json(&out.stdout).ok_or_else(|| MediaError::NotMedia(path.to_owned()))
}

pub(crate) fn parse_probe_json(raw: &[u8]) -> Option<ProbeInfo> {
    let v: Value = serde_json::from_slice(raw).ok()?;
    let secs: f64 = v.pointer("/format/duration")?.as_str()?.parse().ok()?;
    let kinds: Vec<&str> = v
        .get("streams")?
        .as_array()?
        .iter()
        .filter_map(|s| s.get("codec_type")?.as_str())
        .collect();
    Some(ProbeInfo {
        duration_ms: (secs * 1000.0).round() as u64,
        has_video: kinds.contains(&"video"),
        has_audio: kinds.contains(&"audio"),
    })
}

/// `ffmpeg -i` with no output exits non-zero by design; the stream summary
/// on stderr is what we read.
fn probe_banner(ffmpeg: &Path, path: &Path) -> Result<ProbeInfo, MediaError> {
    let out = Command::new(ffmpeg)
        .args(["-hide_banner", "-nostdin", "-i"])
        .arg(path)
        .output()
        .map_err(|e| MediaError::io(ffmpeg, e))?;
    let text = String::from_utf8_lossy(&out.stderr);
    match parse_banner(&text) {
        Some(info) => Ok(info),
        None => Err(failure(ffmpeg, path, &out.stderr)),
    }
}

pub(crate) fn parse_banner(text: &str) -> Option<ProbeInfo> {
    let line = text.lines().find_map(|l| l.trim_start().strip_prefix("Duration: "))?;
    let stamp = line.split(',').next()?.trim();
    let mut parts = stamp.split(':');
    let h: f64 = parts.next()?.parse().ok()?;
    let m: f64 = parts.next()?.parse().ok()?;
    let s: f64 = parts.next()?.parse().ok()?;
    let stream = |kind: &str| {
        text.lines()
            .any(|l| l.trim_start().starts_with("Stream #") && l.contains(kind))
    };
    Some(ProbeInfo {
        duration_ms: ((h * 3600.0 + m * 60.0 + s) * 1000.0).round() as u64,
        has_video: stream(": Video:"),
        has_audio: stream(": Audio:"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banner() {
        let text = "Input #0, mov,mp4 from 'a.mp4':\n  Duration: 00:01:05.43, start: 0.000000, bitrate: 5 kb/s\n  \
                    Stream #0:0[0x1](und): Video: h264 (High), yuv420p\n  Stream #0:1[0x2](und): Audio: aac (LC)\n";
        assert_eq!(
            parse_banner(text),
            Some(ProbeInfo { duration_ms: 65_430, has_video: true, has_audio: true })
        );
        assert_eq!(parse_banner("Error opening input: Invalid data found"), None);
        // "Duration: N/A" is not a duration
        assert_eq!(parse_banner("  Duration: N/A, bitrate: N/A\n"), None);
    }

    #[test]
    fn ffprobe_json() {
        let raw = br#"{"streams":[{"codec_type":"audio"}],"format":{"duration":"44.999000"}}"#;
        assert_eq!(
            parse_probe_json(raw),
            Some(ProbeInfo { duration_ms: 44_999, has_video: false, has_audio: true })
        );
    }
}
