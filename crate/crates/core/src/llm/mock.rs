use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::prompt::{PromptBundle, ENRICH_SCHEMA_ID, IDENTIFY_SCHEMA_ID};
use super::provider::{LlmProvider, ProviderError};
use super::response::moments_to_wire;
use super::{truncate_at_word, KeyMoment, KeyMomentError, ReelSpec, MAX_LABEL_CHARS, MAX_SUMMARY_CHARS};
use crate::timecode::{parse_hms_millis, parse_min_sec};
use crate::transcript::{normalize, Transcript, TranscriptCue};

/// Summary used when a moment has no transcript text to summarise.
pub const EMPTY_CONTEXT_SUMMARY: &str = "No transcript text is available for this segment.";

/// Words taken from the first cue for a mock label.
const LABEL_WORDS: usize = 5;

/// Deterministic stand-in for the model's moment selection.
///
/// `[0, duration]` is split into `K` equal bands. Within each band every
/// contiguous run of cues lying entirely inside the band is a candidate; the
/// run whose length is closest to the target wins, then the one with more
/// words, then the earlier one. A band with no whole cue falls back to a
/// target-length window at the band start.
pub fn mock_select(t: &Transcript, spec: &ReelSpec) -> Result<Vec<KeyMoment>, KeyMomentError> {
    spec.validate()?;
    if t.cues.is_empty() {
        return Err(KeyMomentError::EmptyTranscript);
    }
    let k = u64::from(spec.reel_count);
    if t.duration_ms < k * spec.min_ms() {
        return Err(KeyMomentError::InfeasibleSpec {
            duration_ms: t.duration_ms,
            reel_count: spec.reel_count,
            min_duration_s: spec.min_duration_s,
        });
    }

    let mut words = Vec::with_capacity(t.cues.len() + 1);
    words.push(0usize);
    for c in &t.cues {
        words.push(words[words.len() - 1] + c.word_count());
    }

    let target = spec.target_ms();
    let mut moments = Vec::with_capacity(spec.reel_count as usize);
    for band in 0..k {
        let lo = band * t.duration_ms / k;
        let hi = (band + 1) * t.duration_ms / k;
        let first = t.cues.partition_point(|c| c.start_ms < lo);
        let last = t.cues.partition_point(|c| c.end_ms <= hi);

        // (distance to target, words, start index, end index)
        let mut best: Option<(u64, usize, usize, usize)> = None;
        for i in first..last {
            for j in i..last {
                let len = t.cues[j].end_ms - t.cues[i].start_ms;
                let dist = len.abs_diff(target);
                let w = words[j + 1] - words[i];
                let better = match best {
                    None => true,
                    Some((bd, bw, _, _)) => dist < bd || (dist == bd && w > bw),
                };
                if better {
                    best = Some((dist, w, i, j));
                }
            }
        }

        let rank = band as u32;
        let moment = match best {
            Some((_, _, i, j)) => {
                let window = &t.cues[i..=j];
                KeyMoment {
                    rank,
                    start_ms: window[0].start_ms,
                    end_ms: window[window.len() - 1].end_ms,
                    label: mock_label(window, rank),
                    summary: mock_summary(window),
                }
            }
            None => KeyMoment {
                rank,
                start_ms: lo,
                end_ms: hi.min(lo + target),
                label: fallback_label(rank),
                summary: String::from(EMPTY_CONTEXT_SUMMARY),
            },
        };
        moments.push(moment);
    }
    Ok(moments)
}

pub(crate) fn fallback_label(rank: u32) -> String {
    format!("Segment {}", rank + 1)
}

fn mock_label(window: &[TranscriptCue], rank: u32) -> String {
    let Some(first) = window.first() else {
        return fallback_label(rank);
    };
    let label: Vec<&str> = first.text.split_whitespace().take(LABEL_WORDS).collect();
    if label.is_empty() {
        return fallback_label(rank);
    }
    truncate_at_word(&label.join(" "), MAX_LABEL_CHARS)
}

fn mock_summary(window: &[TranscriptCue]) -> String {
    let joined: Vec<&str> = window.iter().map(|c| c.text.as_str()).collect();
    let summary = truncate_at_word(&joined.join(" "), MAX_SUMMARY_CHARS);
    if summary.is_empty() {
        String::from(EMPTY_CONTEXT_SUMMARY)
    } else {
        summary
    }
}

/// Offline provider that answers from the prompt text alone.
///
/// It reads the cue lines, duration and constraints back out of the prompt,
/// runs [`mock_select`] for identify prompts and the label/summary rule for
/// enrich prompts. Cue lines carry whole seconds, so the mock sees the
/// transcript at one-second resolution.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl MockProvider {
    fn error(message: impl Into<String>) -> ProviderError {
        ProviderError::new("mock", message)
    }
}

impl LlmProvider for MockProvider {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ProviderError> {
        let cues = parse_cue_lines(&prompt.user_text);
        if prompt.response_schema_id == IDENTIFY_SCHEMA_ID {
            let duration = parse_duration(&prompt.user_text).ok_or_else(|| Self::error("prompt has no duration line"))?;
            let spec = parse_spec(&prompt.user_text).ok_or_else(|| Self::error("prompt has no constraint block"))?;
            let t = normalize(&Transcript::from_cues("mock", cues, duration)).map_err(|e| Self::error(format!("{e}")))?;
            let moments = mock_select(&t, &spec).map_err(|e| Self::error(format!("{e}")))?;
            Ok(moments_to_wire(&moments))
        } else if prompt.response_schema_id == ENRICH_SCHEMA_ID {
            if cues.is_empty() {
                return Err(Self::error("enrich prompt has no cue lines"));
            }
            let body = serde_json::json!({
                "label": mock_label(&cues, 0),
                "summary": mock_summary(&cues),
            });
            Ok(alloc::string::ToString::to_string(&body))
        } else {
            Err(Self::error(format!("unknown response schema `{}`", prompt.response_schema_id)))
        }
    }
}

fn parse_cue_lines(text: &str) -> Vec<TranscriptCue> {
    let mut cues = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('[') else { continue };
        let Some((span, body)) = rest.split_once("] ") else { continue };
        let Some((a, b)) = span.split_once('\u{2013}') else { continue };
        if let (Some(start), Some(end)) = (parse_min_sec(a), parse_min_sec(b)) {
            cues.push(TranscriptCue::new(cues.len() as u32, start, end, body));
        }
    }
    cues
}

fn parse_duration(text: &str) -> Option<u64> {
    let first = text.lines().next()?;
    let (_, tail) = first.split_once("duration ")?;
    parse_hms_millis(tail.trim_end_matches("):").trim_end_matches(')'))
}

fn parse_spec(text: &str) -> Option<ReelSpec> {
    let mut count_and_bounds = None;
    let mut target = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("Select exactly ") {
            let mut parts = rest.split_whitespace();
            let k: u32 = parts.next()?.parse().ok()?;
            let bounds = rest.split_once("each ")?.1.split_whitespace().next()?;
            let (lo, hi) = bounds.split_once('\u{2013}')?;
            count_and_bounds = Some((k, lo.parse().ok()?, hi.parse().ok()?));
        } else if let Some(rest) = line.strip_prefix("Aim for about ") {
            target = rest.split_whitespace().next()?.parse().ok();
        }
    }
    let (reel_count, min_duration_s, max_duration_s) = count_and_bounds?;
    let spec = ReelSpec {
        reel_count,
        min_duration_s,
        max_duration_s,
        target_duration_s: target?,
    };
    spec.validate().ok()?;
    Some(spec)
}
