use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{KeyMomentError, LlmOptions, ReelSpec, MAX_LABEL_CHARS, MAX_SUMMARY_CHARS};
use crate::timecode::{format_hms_millis, format_min_sec};
use crate::transcript::{Transcript, TranscriptCue};

pub const IDENTIFY_SCHEMA_ID: &str = "reeled.keymoments.identify.v1";
pub const ENRICH_SCHEMA_ID: &str = "reeled.keymoments.enrich.v1";

/// Which pipeline call a prompt is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Find the key moments across the whole transcript.
    Identify,
    /// Label and summarise a single moment.
    Enrich,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProviderParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
}

/// Fully rendered prompt plus the parameters the provider should use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub response_schema_id: String,
    pub provider_params: ProviderParams,
}

impl PromptBundle {
    /// Copy of this prompt with the validator's complaint appended, used to
    /// ask the model to repair its previous reply.
    pub fn with_repair_note(&self, error: &dyn core::fmt::Display) -> Self {
        let mut next = self.clone();
        let _ = write!(
            next.user_text,
            "\n\nYour previous reply was rejected: {error}\nReply again with the corrected JSON only."
        );
        next
    }
}

const IDENTIFY_SYSTEM: &str = "You are an instructional designer who turns recorded lectures into short \
educational reels. Read the timestamped transcript, work out the learning goals of the lecture and \
choose the moments that teach its core concepts. Every moment must make sense on its own. \
Reply with JSON only.";

const ENRICH_SYSTEM: &str = "You write the title and summary for one short educational reel cut \
from a lecture. Base both strictly on the transcript excerpt you are given and keep the learning \
goal of the excerpt in focus. Reply with JSON only.";

/// Renders a transcript cue as `[mm:ss–mm:ss] text`.
pub fn cue_line(cue: &TranscriptCue) -> String {
    format!(
        "[{}\u{2013}{}] {}",
        format_min_sec(cue.start_ms),
        format_min_sec(cue.end_ms),
        cue.text
    )
}

/// Renders the prompt for `stage`. Rendering is a pure function of its
/// arguments.
///
/// `window` is the cue excerpt for [`Stage::Enrich`] and is ignored for
/// [`Stage::Identify`].
pub fn build_prompt(
    t: &Transcript,
    spec: &ReelSpec,
    stage: Stage,
    window: Option<&[TranscriptCue]>,
    options: &LlmOptions,
) -> Result<PromptBundle, KeyMomentError> {
    if t.cues.is_empty() {
        return Err(KeyMomentError::EmptyTranscript);
    }
    let provider_params = ProviderParams {
        temperature: options.temperature,
        max_output_tokens: options.max_output_tokens,
    };
    match stage {
        Stage::Identify => Ok(PromptBundle {
            system_text: String::from(IDENTIFY_SYSTEM),
            user_text: identify_text(t, spec),
            response_schema_id: String::from(IDENTIFY_SCHEMA_ID),
            provider_params,
        }),
        Stage::Enrich => {
            let window = window.filter(|w| !w.is_empty()).ok_or(KeyMomentError::MissingWindow)?;
            Ok(PromptBundle {
                system_text: String::from(ENRICH_SYSTEM),
                user_text: enrich_text(window),
                response_schema_id: String::from(ENRICH_SCHEMA_ID),
                provider_params,
            })
        }
    }
}

fn identify_text(t: &Transcript, spec: &ReelSpec) -> String {
    let k = spec.reel_count;
    let noun = if k == 1 { "moment" } else { "moments" };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Lecture transcript ({} cues, duration {}):",
        t.cues.len(),
        format_hms_millis(t.duration_ms)
    );
    for cue in &t.cues {
        s.push_str(&cue_line(cue));
        s.push('\n');
    }
    let _ = write!(
        s,
        "\nConstraints:\n\
         Select exactly {k} {noun}, each {}\u{2013}{} seconds long.\n\
         Aim for about {} seconds per moment.\n\
         Moments must not overlap and must lie inside the lecture.\n\
         \nResponse format:\n\
         Return only a JSON array of exactly {k} objects with the keys \"start\", \"end\", \"label\" and \"summary\".\n\
         \"start\" and \"end\" are timestamps written as HH:MM:SS.mmm.\n\
         \"label\" is a clear title of at most {MAX_LABEL_CHARS} characters and \"summary\" a short summary of at most {MAX_SUMMARY_CHARS} characters.\n",
        spec.min_duration_s, spec.max_duration_s, spec.target_duration_s,
    );
    s
}

fn enrich_text(window: &[TranscriptCue]) -> String {
    let mut s = String::new();
    let start = window[0].start_ms;
    let end = window[window.len() - 1].end_ms;
    let _ = writeln!(
        s,
        "Transcript excerpt of one key moment ({} to {}):",
        format_hms_millis(start),
        format_hms_millis(end)
    );
    for cue in window {
        s.push_str(&cue_line(cue));
        s.push('\n');
    }
    let _ = write!(
        s,
        "\nResponse format:\n\
         Return only a JSON object with the keys \"label\" and \"summary\".\n\
         \"label\" is a clear title of at most {MAX_LABEL_CHARS} characters and \"summary\" a short summary of at most {MAX_SUMMARY_CHARS} characters.\n"
    );
    s
}
