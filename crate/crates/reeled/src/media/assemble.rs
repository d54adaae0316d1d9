use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rayon::prelude::*;
use reeled_core::manifest::{ArtifactEntry, CombinedArtifact, PlanManifest, ReelManifest};
use reeled_core::planner::CutPlan;
use serde::{Deserialize, Serialize};

use super::trim::REENCODE_TOLERANCE_MS;
use super::{probe, sha256_file, trim_segment, MediaError, MediaTools, ReelArtifact, TrimOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One file per segment.
    #[default]
    PerReel,
    /// Per-segment files plus one file with all of them back to back.
    SingleConcat,
}

impl Layout {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "per_reel" => Some(Self::PerReel),
            "single_concat" => Some(Self::SingleConcat),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AssembleOptions {
    pub layout: Layout,
    pub trim: TrimOptions,
    /// Parallel trims; 0 means one per CPU.
    pub workers: usize,
    /// Copied into the manifest verbatim.
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Assembled {
    /// Ordered by segment order.
    pub artifacts: Vec<ReelArtifact>,
    pub combined: Option<CombinedArtifact>,
    pub manifest: ReelManifest,
    pub manifest_path: PathBuf,
}

pub fn reel_file_name(order: u32) -> String {
    format!("reel_{order}.mp4")
}

pub fn concat_file_name() -> &'static str {
    "reel_all.mp4"
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Trims every segment of `plan` into `out_dir` and writes `manifest.json`
/// once all clips have been probed.
///
/// On failure the error carries the lowest failing segment order; clips
/// that did succeed are left in place and no manifest is written.
pub fn assemble(
    tools: &MediaTools,
    source: &Path,
    plan: &CutPlan,
    out_dir: &Path,
    opts: &AssembleOptions,
) -> Result<Assembled, MediaError> {
    for (i, s) in plan.segments.iter().enumerate() {
        if s.order as usize != i {
            return Err(MediaError::ConcatFailure(format!("segment at position {i} has order {}", s.order)));
        }
    }
    fs::create_dir_all(out_dir).map_err(|e| MediaError::io(out_dir, e))?;

    let workers = if opts.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        opts.workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.min(plan.segments.len().max(1)))
        .build()
        .map_err(|e| MediaError::ConcatFailure(format!("worker pool: {e}")))?;
    let results: Vec<Result<ReelArtifact, MediaError>> = pool.install(|| {
        plan.segments
            .par_iter()
            .map(|seg| {
                let out = out_dir.join(reel_file_name(seg.order));
                trim_segment(tools, source, seg, &opts.trim, &out).map_err(|e| match e {
                    e @ MediaError::EmptySegment { .. } => e,
                    e => MediaError::Segment { order: seg.order, source: Box::new(e) },
                })
            })
            .collect()
    });
    let artifacts = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let combined = match opts.layout {
        Layout::PerReel => None,
        Layout::SingleConcat => Some(concat(tools, out_dir, &artifacts, plan)?),
    };

    let manifest = ReelManifest {
        plan: PlanManifest::from(plan),
        generated_at: opts.generated_at.clone(),
        artifacts: artifacts
            .iter()
            .map(|a| ArtifactEntry {
                order: a.segment_order,
                file: reel_file_name(a.segment_order),
                duration_ms: a.measured_duration_ms,
                checksum: a.checksum.clone(),
            })
            .collect(),
        combined: combined.clone(),
    };
    let manifest_path = write_manifest(out_dir, &manifest)?;
    Ok(Assembled { artifacts, combined, manifest, manifest_path })
}

fn concat(tools: &MediaTools, out_dir: &Path, parts: &[ReelArtifact], plan: &CutPlan) -> Result<CombinedArtifact, MediaError> {
    let list_path = out_dir.join("concat.txt");
    let list: String = parts
        .iter()
        .map(|a| format!("file '{}'\n", reel_file_name(a.segment_order)))
        .collect();
    fs::write(&list_path, list).map_err(|e| MediaError::io(&list_path, e))?;
    let out = out_dir.join(concat_file_name());
    let run = Command::new(&tools.ffmpeg)
        .args(["-nostdin", "-hide_banner", "-loglevel", "error", "-y", "-f", "concat", "-safe", "0", "-i"])
        .arg(&list_path)
        .args(["-c", "copy", "-fflags", "+bitexact", "-map_metadata", "-1", "-movflags", "+faststart"])
        .arg(&out)
        .output()
        .map_err(|e| MediaError::io(&tools.ffmpeg, e))?;
    let _ = fs::remove_file(&list_path);
    if !run.status.success() {
        return Err(MediaError::ConcatFailure(String::from_utf8_lossy(&run.stderr).trim().to_string()));
    }
    let info = probe(tools, &out).map_err(|e| MediaError::ConcatFailure(e.to_string()))?;
    let planned: u64 = plan.segments.iter().map(|s| s.duration_ms()).sum();
    let tolerance = REENCODE_TOLERANCE_MS * plan.segments.len() as u64;
    if info.duration_ms.abs_diff(planned) > tolerance {
        return Err(MediaError::ConcatFailure(format!(
            "{} lasts {} ms, segments sum to {planned} ms",
            out.display(),
            info.duration_ms
        )));
    }
    Ok(CombinedArtifact {
        file: concat_file_name().into(),
        duration_ms: info.duration_ms,
        checksum: sha256_file(&out)?,
    })
}

/// Writes via a temporary file and rename so a reader never sees a partial
/// manifest.
pub fn write_manifest(out_dir: &Path, manifest: &ReelManifest) -> Result<PathBuf, MediaError> {
    let path = out_dir.join(MANIFEST_FILE);
    let tmp = out_dir.join(".manifest.json.tmp");
    let mut body = manifest.to_json_pretty();
    body.push('\n');
    fs::write(&tmp, body).map_err(|e| MediaError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| MediaError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_layouts() {
        assert_eq!(reel_file_name(3), "reel_3.mp4");
        assert_eq!(Layout::parse("single_concat"), Some(Layout::SingleConcat));
        assert_eq!(Layout::parse("per-reel"), None);
        assert_eq!(serde_json::to_string(&Layout::PerReel).unwrap(), "\"per_reel\"");
    }
}
