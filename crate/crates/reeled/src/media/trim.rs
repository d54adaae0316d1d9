use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use reeled_core::planner::ReelSegment;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{probe, MediaError, MediaTools};

/// Allowed gap between planned and probed duration for re-encoded clips.
pub const REENCODE_TOLERANCE_MS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimMode {
    /// Stream copy: fast, cut points land on keyframes.
    Copy,
    /// H.264/AAC with fixed settings: frame accurate and reproducible.
    #[default]
    Reencode,
}

impl TrimMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "copy" => Some(Self::Copy),
            "reencode" => Some(Self::Reencode),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrimOptions {
    pub mode: TrimMode,
    /// Source keyframe spacing, the duration tolerance in copy mode.
    pub keyframe_interval_ms: u64,
}

impl Default for TrimOptions {
    fn default() -> Self {
        Self { mode: TrimMode::Reencode, keyframe_interval_ms: 2000 }
    }
}

impl TrimOptions {
    pub fn tolerance_ms(&self) -> u64 {
        match self.mode {
            TrimMode::Reencode => REENCODE_TOLERANCE_MS,
            TrimMode::Copy => self.keyframe_interval_ms.max(REENCODE_TOLERANCE_MS),
        }
    }
}

/// A probed clip on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReelArtifact {
    pub segment_order: u32,
    pub file_path: PathBuf,
    pub measured_duration_ms: u64,
    /// Lower-case hex SHA-256.
    pub checksum: String,
}

fn seconds(ms: u64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

// Fixed encoder parameters; `bitexact` keeps version strings out of the
// container so identical inputs give identical bytes.
const REENCODE_ARGS: &[&str] = &[
    "-c:v", "libx264", "-preset", "veryfast", "-crf", "23", "-pix_fmt", "yuv420p", "-threads", "1",
    "-c:a", "aac", "-b:a", "128k",
    "-fflags", "+bitexact", "-flags:v", "+bitexact", "-flags:a", "+bitexact",
    "-map_metadata", "-1", "-movflags", "+faststart",
];

/// Cuts `[cut_start_ms, cut_end_ms)` of `source` into `out`, then probes it.
pub fn trim_segment(
    tools: &MediaTools,
    source: &Path,
    seg: &ReelSegment,
    opts: &TrimOptions,
    out: &Path,
) -> Result<ReelArtifact, MediaError> {
    if seg.cut_end_ms <= seg.cut_start_ms {
        return Err(MediaError::EmptySegment { order: seg.order, start_ms: seg.cut_start_ms, end_ms: seg.cut_end_ms });
    }
    if !source.is_file() {
        return Err(MediaError::ToolFailure {
            tool: tools.ffmpeg.display().to_string(),
            path: source.to_owned(),
            stderr: format!("source {} does not exist", source.display()),
        });
    }
    let planned = seg.duration_ms();
    let mut cmd = Command::new(&tools.ffmpeg);
    cmd.args(["-nostdin", "-hide_banner", "-loglevel", "error", "-y", "-ss"])
        .arg(seconds(seg.cut_start_ms))
        .arg("-i")
        .arg(source)
        .arg("-t")
        .arg(seconds(planned))
        .args(["-map", "0:v:0?", "-map", "0:a:0?"]);
    match opts.mode {
        TrimMode::Reencode => cmd.args(REENCODE_ARGS),
        TrimMode::Copy => cmd.args(["-c", "copy", "-avoid_negative_ts", "make_zero"]),
    };
    let run = cmd.arg(out).output().map_err(|e| MediaError::io(&tools.ffmpeg, e))?;
    if !run.status.success() {
        return Err(MediaError::ToolFailure {
            tool: tools.ffmpeg.display().to_string(),
            path: source.to_owned(),
            stderr: String::from_utf8_lossy(&run.stderr).trim().to_string(),
        });
    }

    let info = probe(tools, out)?;
    let tolerance = opts.tolerance_ms();
    if info.duration_ms.abs_diff(planned) > tolerance {
        return Err(MediaError::DurationMismatch {
            path: out.to_owned(),
            measured_ms: info.duration_ms,
            planned_ms: planned,
            tolerance_ms: tolerance,
        });
    }
    Ok(ReelArtifact {
        segment_order: seg.order,
        file_path: out.to_owned(),
        measured_duration_ms: info.duration_ms,
        checksum: sha256_file(out)?,
    })
}

pub fn sha256_file(path: &Path) -> Result<String, MediaError> {
    let mut hasher = Sha256::new();
    let mut f = File::open(path).map_err(|e| MediaError::io(path, e))?;
    io::copy(&mut f, &mut hasher).map_err(|e| MediaError::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}
