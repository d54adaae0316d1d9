use alloc::string::String;
use alloc::vec::Vec;

use super::mock::{fallback_label, EMPTY_CONTEXT_SUMMARY};
use super::prompt::{build_prompt, PromptBundle, Stage};
use super::provider::LlmProvider;
use super::response::{validate_enrichment, validate_response, ResponseError};
use super::{KeyMoment, KeyMomentError, LlmOptions, ReelSpec};
use crate::transcript::{slice, Transcript};

/// Validated stage-one output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identified {
    pub moments: Vec<KeyMoment>,
    /// Repair attempts used, at most `max_retries`.
    pub retries: u32,
}

/// Calls `provider` until `validate` accepts a reply, re-prompting with the
/// rejection message after each failure.
fn with_repair<P, T>(
    provider: &P,
    prompt: &PromptBundle,
    max_retries: u32,
    rank: Option<u32>,
    validate: impl Fn(&str) -> Result<T, ResponseError>,
) -> Result<(T, u32), KeyMomentError>
where
    P: LlmProvider + ?Sized,
{
    let mut current = prompt.clone();
    let mut attempt = 0;
    loop {
        let reply = provider.complete(&current)?;
        match validate(&reply) {
            Ok(value) => return Ok((value, attempt)),
            Err(err) if attempt >= max_retries => {
                return Err(KeyMomentError::ExhaustedRetries {
                    rank,
                    attempts: attempt + 1,
                    last: err,
                })
            }
            Err(err) => {
                current = prompt.with_repair_note(&err);
                attempt += 1;
            }
        }
    }
}

/// Stage one: asks the model for exactly `spec.reel_count` key moments.
///
/// Provider failures are returned immediately; invalid replies go through the
/// repair loop.
pub fn identify_key_moments<P>(
    provider: &P,
    t: &Transcript,
    spec: &ReelSpec,
    options: &LlmOptions,
) -> Result<Identified, KeyMomentError>
where
    P: LlmProvider + ?Sized,
{
    spec.validate()?;
    let prompt = build_prompt(t, spec, Stage::Identify, None, options)?;
    let (moments, retries) = with_repair(provider, &prompt, options.max_retries, None, |raw| {
        validate_response(raw, t, spec)
    })?;
    Ok(Identified { moments, retries })
}

/// Stage two for a single moment. Timestamps and rank are never changed.
///
/// A moment whose window holds no cue gets a `Segment N` label and a fixed
/// notice as its summary without calling the provider.
pub fn enrich_moment<P>(
    provider: &P,
    t: &Transcript,
    moment: &KeyMoment,
    options: &LlmOptions,
) -> Result<KeyMoment, KeyMomentError>
where
    P: LlmProvider + ?Sized,
{
    let window = slice(t, moment.start_ms, moment.end_ms).unwrap_or(&[]);
    if window.is_empty() {
        return Ok(KeyMoment {
            label: fallback_label(moment.rank),
            summary: String::from(EMPTY_CONTEXT_SUMMARY),
            ..moment.clone()
        });
    }
    // the enrich template ignores the ReelSpec
    let prompt = build_prompt(t, &ReelSpec::default(), Stage::Enrich, Some(window), options)?;
    let (enrichment, _) = with_repair(provider, &prompt, options.max_retries, Some(moment.rank), validate_enrichment)?;
    Ok(KeyMoment {
        label: enrichment.label,
        summary: enrichment.summary,
        ..moment.clone()
    })
}

/// Stage two: one provider call per moment, in order.
pub fn enrich_moments<P>(
    provider: &P,
    t: &Transcript,
    moments: &[KeyMoment],
    options: &LlmOptions,
) -> Result<Vec<KeyMoment>, KeyMomentError>
where
    P: LlmProvider + ?Sized,
{
    moments.iter().map(|m| enrich_moment(provider, t, m, options)).collect()
}
