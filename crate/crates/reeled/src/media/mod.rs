//! Trimming, probing and concatenating reels with an external ffmpeg.

mod assemble;
mod probe;
mod tools;
mod trim;

use std::path::PathBuf;

use thiserror::Error;

pub use assemble::{assemble, concat_file_name, reel_file_name, write_manifest, AssembleOptions, Assembled, Layout, MANIFEST_FILE};
pub use probe::{probe, ProbeInfo};
pub use tools::{MediaTools, TOOL_DIR_VAR};
pub use trim::{sha256_file, trim_segment, ReelArtifact, TrimMode, TrimOptions, REENCODE_TOLERANCE_MS};

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("{tool} not found (looked in {searched})")]
    ToolNotFound { tool: &'static str, searched: String },
    #[error("{tool} failed on {path}: {stderr}")]
    ToolFailure { tool: String, path: PathBuf, stderr: String },
    #[error("{0} is not a media file")]
    NotMedia(PathBuf),
    #[error("{path}: measured {measured_ms} ms, planned {planned_ms} ms (tolerance {tolerance_ms} ms)")]
    DurationMismatch { path: PathBuf, measured_ms: u64, planned_ms: u64, tolerance_ms: u64 },
    #[error("segment {order} has no extent ({start_ms}..{end_ms})")]
    EmptySegment { order: u32, start_ms: u64, end_ms: u64 },
    #[error("segment {order}: {source}")]
    Segment {
        order: u32,
        #[source]
        source: Box<MediaError>,
    },
    #[error("concatenation failed: {0}")]
    ConcatFailure(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MediaError {
    /// Order of the failing segment, when the error is tied to one.
    pub fn segment_order(&self) -> Option<u32> {
        match self {
            Self::Segment { order, .. } | Self::EmptySegment { order, .. } => Some(*order),
            _ => None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
