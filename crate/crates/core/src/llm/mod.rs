//! Key-moment identification and enrichment through a pluggable LLM.
//!
//! Stage one asks the model for `K` timestamped moments covering the
//! lecture's core concepts; stage two makes one extra call per moment to write
//! its label and summary. Every reply is validated, and rejected replies are
//! re-prompted with the validator's message up to [`LlmOptions::max_retries`]
//! times.

mod mock;
mod pipeline;
mod prompt;
mod provider;
mod response;

use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{mock_select, MockProvider, EMPTY_CONTEXT_SUMMARY};
pub use pipeline::{enrich_moment, enrich_moments, identify_key_moments, Identified};
pub use prompt::{build_prompt, cue_line, PromptBundle, ProviderParams, Stage, ENRICH_SCHEMA_ID, IDENTIFY_SCHEMA_ID};
pub use provider::{LlmProvider, ProviderError, ScriptedProvider};
pub use response::{moments_to_wire, validate_enrichment, validate_response, Enrichment, ResponseError};

use crate::transcript::Transcript;

/// Longest label, in characters.
pub const MAX_LABEL_CHARS: usize = 80;
/// Longest summary, in characters.
pub const MAX_SUMMARY_CHARS: usize = 400;

/// How many reels to cut and how long each may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReelSpec {
    pub reel_count: u32,
    pub min_duration_s: u32,
    pub max_duration_s: u32,
    pub target_duration_s: u32,
}

impl Default for ReelSpec {
    /// Five reels of 30 to 60 seconds, aiming for 45.
    fn default() -> Self {
        Self {
            reel_count: 5,
            min_duration_s: 30,
            max_duration_s: 60,
            target_duration_s: 45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("reel count must be at least 1")]
    NoReels,
    #[error("minimum duration must be positive")]
    ZeroMinimum,
    #[error("durations must satisfy min ({min}) <= target ({target}) <= max ({max})")]
    Unordered { min: u32, target: u32, max: u32 },
}

impl ReelSpec {
    /// A spec whose target sits at the midpoint of `[min, max]`.
    pub fn new(reel_count: u32, min_duration_s: u32, max_duration_s: u32) -> Result<Self, SpecError> {
        let spec = Self {
            reel_count,
            min_duration_s,
            max_duration_s,
            target_duration_s: min_duration_s + max_duration_s.saturating_sub(min_duration_s) / 2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_target(mut self, target_duration_s: u32) -> Result<Self, SpecError> {
        self.target_duration_s = target_duration_s;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.reel_count == 0 {
            return Err(SpecError::NoReels);
        }
        if self.min_duration_s == 0 {
            return Err(SpecError::ZeroMinimum);
        }
        if !(self.min_duration_s <= self.target_duration_s && self.target_duration_s <= self.max_duration_s) {
            return Err(SpecError::Unordered {
                min: self.min_duration_s,
                target: self.target_duration_s,
                max: self.max_duration_s,
            });
        }
        Ok(())
    }

    pub fn min_ms(&self) -> u64 {
        u64::from(self.min_duration_s) * 1000
    }

    pub fn max_ms(&self) -> u64 {
        u64::from(self.max_duration_s) * 1000
    }

    pub fn target_ms(&self) -> u64 {
        u64::from(self.target_duration_s) * 1000
    }
}

/// A span of the source video judged to teach one core concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMoment {
    /// Presentation order, `0..K`.
    pub rank: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
    pub summary: String,
}

impl KeyMoment {
    /// True when the moment satisfies its invariants against `t`.
    pub fn is_valid_for(&self, t: &Transcript) -> bool {
        self.start_ms < self.end_ms
            && self.end_ms <= t.duration_ms
            && !self.label.trim().is_empty()
            && !self.summary.trim().is_empty()
            && self.label.chars().count() <= MAX_LABEL_CHARS
            && self.summary.chars().count() <= MAX_SUMMARY_CHARS
    }
}

/// Knobs for the provider calls and the repair loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlmOptions {
    pub max_retries: u32,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for LlmOptions {
    fn default() -> Self {
        Self {
            max_retries: 2,
            temperature: 0.0,
            max_output_tokens: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyMomentError {
    #[error("transcript contains no cues")]
    EmptyTranscript,
    #[error("the enrich stage needs a non-empty cue window")]
    MissingWindow,
    #[error("invalid reel spec: {0}")]
    InvalidSpec(#[from] SpecError),
    #[error("a {duration_ms} ms transcript cannot hold {reel_count} reels of at least {min_duration_s} s")]
    InfeasibleSpec {
        duration_ms: u64,
        reel_count: u32,
        min_duration_s: u32,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("{} still invalid after {attempts} attempts: {last}", subject(.rank))]
    ExhaustedRetries {
        rank: Option<u32>,
        attempts: u32,
        last: ResponseError,
    },
}

fn subject(rank: &Option<u32>) -> String {
    match rank {
        Some(r) => alloc::format!("moment {r}"),
        None => String::from("response"),
    }
}

/// Shortens `text` to at most `max_chars` characters, cutting at a word
/// boundary when one exists.
pub fn truncate_at_word(text: &str, max_chars: usize) -> String {
    let text = text.trim();
    if text.chars().count() <= max_chars {
        return String::from(text);
    }
    let mut out = String::new();
    let mut used = 0;
    for word in text.split_whitespace() {
        let len = word.chars().count();
        let extra = if out.is_empty() { len } else { len + 1 };
        if used + extra > max_chars {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
        used += extra;
    }
    if out.is_empty() {
        out.extend(text.chars().take(max_chars));
    }
    out
}
