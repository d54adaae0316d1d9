//! Serialized forms of a cut plan and of the reels produced from it.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::llm::ReelSpec;
use crate::planner::{CutPlan, ReelSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSpec {
    pub reel_count: u32,
    pub min_s: u32,
    pub max_s: u32,
    pub target_s: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSegment {
    pub order: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
    pub summary: String,
}

/// The plan as written by `--plan-only` and stored with each job.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanManifest {
    pub source_id: String,
    pub spec: ManifestSpec,
    pub segments: Vec<ManifestSegment>,
}

/// One rendered reel file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub order: u32,
    /// Path relative to the output directory.
    pub file: String,
    pub duration_ms: u64,
    /// Lower-case hex SHA-256 of the file.
    pub checksum: String,
}

/// The single file holding every segment back to back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedArtifact {
    pub file: String,
    pub duration_ms: u64,
    pub checksum: String,
}

/// Plan plus rendered artifacts, written once every artifact has been
/// probed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReelManifest {
    #[serde(flatten)]
    pub plan: PlanManifest,
    /// Supplied by the caller so identical runs can produce identical bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    /// Empty when only the plan was requested.
    pub artifacts: Vec<ArtifactEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedArtifact>,
}

impl ReelManifest {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

impl From<&CutPlan> for PlanManifest {
    fn from(p: &CutPlan) -> Self {
        Self {
            source_id: p.source_id.clone(),
            spec: ManifestSpec {
                reel_count: p.spec.reel_count,
                min_s: p.spec.min_duration_s,
                max_s: p.spec.max_duration_s,
                target_s: p.spec.target_duration_s,
            },
            segments: p
                .segments
                .iter()
                .map(|s| ManifestSegment {
                    order: s.order,
                    start_ms: s.cut_start_ms,
                    end_ms: s.cut_end_ms,
                    label: s.label.clone(),
                    summary: s.summary.clone(),
                })
                .collect(),
        }
    }
}

impl From<&PlanManifest> for CutPlan {
    /// Moment ranks are not stored in a manifest; they are restored as the
    /// segment order.
    fn from(m: &PlanManifest) -> Self {
        Self {
            source_id: m.source_id.clone(),
            spec: ReelSpec {
                reel_count: m.spec.reel_count,
                min_duration_s: m.spec.min_s,
                max_duration_s: m.spec.max_s,
                target_duration_s: m.spec.target_s,
            },
            segments: m
                .segments
                .iter()
                .map(|s| ReelSegment {
                    order: s.order,
                    cut_start_ms: s.start_ms,
                    cut_end_ms: s.end_ms,
                    label: s.label.clone(),
                    summary: s.summary.clone(),
                    source_moment_rank: s.order,
                })
                .collect(),
        }
    }
}

impl PlanManifest {
    pub fn to_json_pretty(&self) -> String {
        // only strings and integers: serialization cannot fail
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn keys_and_round_trip() {
        let plan = CutPlan {
            source_id: "lecture".into(),
            spec: ReelSpec::default(),
            segments: vec![ReelSegment {
                order: 0,
                cut_start_ms: 5000,
                cut_end_ms: 50_000,
                label: "Intro".into(),
                summary: "What the lecture covers".into(),
                source_moment_rank: 0,
            }],
        };
        let m = PlanManifest::from(&plan);
        let v: serde_json::Value = serde_json::from_str(&m.to_json_pretty()).unwrap();
        assert_eq!(v["spec"]["min_s"], 30);
        assert_eq!(v["spec"]["target_s"], 45);
        assert_eq!(v["segments"][0]["start_ms"], 5000);
        assert_eq!(CutPlan::from(&m), plan);

        let full = ReelManifest {
            plan: m,
            generated_at: None,
            artifacts: vec![ArtifactEntry { order: 0, file: "reel_0.mp4".into(), duration_ms: 45_000, checksum: "ab".into() }],
            combined: None,
        };
        let v = serde_json::to_value(&full).unwrap();
        assert_eq!(v["source_id"], "lecture");
        assert_eq!(v["artifacts"][0]["file"], "reel_0.mp4");
        assert!(v.get("generated_at").is_none() && v.get("combined").is_none());
        let back: ReelManifest = serde_json::from_value(v).unwrap();
        assert_eq!(back, full);
    }
}
