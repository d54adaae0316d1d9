use chrono::{DateTime, Utc};
use reeled_core::analytics::{LikertResponse, QuizScore};
use reeled_core::llm::ReelSpec;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Downloading,
    Transcribing,
    LlmProcessing,
    Planning,
    Trimming,
    Complete,
    Failed,
}

impl JobStatus {
    /// The forward order; `Failed` sits outside it.
    pub const ORDER: [JobStatus; 7] = [
        Self::Queued,
        Self::Downloading,
        Self::Transcribing,
        Self::LlmProcessing,
        Self::Planning,
        Self::Trimming,
        Self::Complete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Queued => "queued",
            Self::Downloading => "downloading",
            Self::Transcribing => "transcribing",
            Self::LlmProcessing => "llm_processing",
            Self::Planning => "planning",
            Self::Trimming => "trimming",
            Self::Complete => "complete",
            Self::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ORDER.into_iter().chain([Self::Failed]).find(|x| x.as_str() == s)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Complete | Self::Failed)
    }

    /// The stage that follows, `None` for terminal states.
    pub fn next(self) -> Option<Self> {
        let i = Self::ORDER.iter().position(|s| *s == self)?;
        Self::ORDER.get(i + 1).copied()
    }

    /// Progress shown while in this state. `Failed` keeps whatever the job
    /// had reached.
    pub fn progress_pct(self) -> Option<u8> {
        Some(match self {
            Self::Queued => 0,
            Self::Downloading => 10,
            Self::Transcribing => 25,
            Self::LlmProcessing => 40,
            Self::Planning => 70,
            Self::Trimming => 85,
            Self::Complete => 100,
            Self::Failed => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobFailure {
    pub stage: JobStatus,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationJob {
    pub job_id: Uuid,
    pub source_uri: String,
    pub captions_ref: String,
    pub spec: ReelSpec,
    pub status: JobStatus,
    pub progress_pct: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<JobFailure>,
    /// Every status the job has been in, oldest first.
    pub history: Vec<JobStatus>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl GenerationJob {
    pub fn new(source_uri: impl Into<String>, captions_ref: impl Into<String>, spec: ReelSpec, now: DateTime<Utc>) -> Self {
        Self {
            job_id: Uuid::new_v4(),
            source_uri: source_uri.into(),
            captions_ref: captions_ref.into(),
            spec,
            status: JobStatus::Queued,
            progress_pct: 0,
            failure: None,
            history: vec![JobStatus::Queued],
            created_at: now,
            updated_at: now,
        }
    }
}

/// The rendered file behind a reel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReelMedia {
    /// Path under the media root, served at `/media/<file>`.
    pub file: String,
    pub duration_ms: u64,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reel {
    pub reel_id: Uuid,
    pub job_id: Uuid,
    pub order: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
    pub summary: String,
    /// Students see published reels only.
    pub published: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<ReelMedia>,
    /// A re-trim after an edit is in flight; `media` still holds the old
    /// file until the new one has been probed.
    pub retrimming: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    LongForm,
    Reels,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LongForm => "long_form",
            Self::Reels => "reels",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "long_form" => Some(Self::LongForm),
            "reels" => Some(Self::Reels),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub assignment_id: Uuid,
    /// The job whose reels are assigned.
    pub reel_set_id: Uuid,
    pub student_id: String,
    pub quiz_id: String,
    pub condition: Condition,
    /// Event stream opened together with the assignment.
    pub session_id: Uuid,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizResult {
    pub assignment_id: Uuid,
    pub score: QuizScore,
    /// From the first `quiz_open` to the first `quiz_submit`.
    #[serde(default)]
    pub quiz_duration_s: Option<f64>,
    pub revisits: u32,
    /// Questionnaire answers submitted with the quiz.
    #[serde(default)]
    pub questionnaire: Vec<LikertResponse>,
    pub submitted_at: DateTime<Utc>,
}
