use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use super::{truncate_at_word, KeyMoment, ReelSpec, MAX_LABEL_CHARS, MAX_SUMMARY_CHARS};
use crate::timecode::{format_hms_millis, parse_hms_millis};
use crate::transcript::Transcript;

/// Why a model reply was rejected. The message is fed back to the model on
/// the next attempt.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("reply is not valid JSON: {0}")]
    Parse(String),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("timestamp out of range at `{path}`: {message}")]
    Range { path: String, message: String },
    #[error("expected exactly {expected} moments, found {found}")]
    Count { expected: u32, found: usize },
}

impl ResponseError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Label and summary produced by the enrich stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enrichment {
    pub label: String,
    pub summary: String,
}

/// Strips a surrounding Markdown code fence, which chat models often add.
fn unfence(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

fn parse_json(raw: &str) -> Result<Value, ResponseError> {
    serde_json::from_str(unfence(raw)).map_err(|e| ResponseError::Parse(e.to_string()))
}

fn text_field(obj: &Map<String, Value>, path: &str, key: &str, max_chars: usize) -> Result<String, ResponseError> {
    let field_path = format!("{path}.{key}");
    match obj.get(key) {
        None => Err(ResponseError::schema(field_path, "missing field")),
        Some(Value::String(s)) if s.trim().is_empty() => Err(ResponseError::schema(field_path, "must not be empty")),
        Some(Value::String(s)) => Ok(truncate_at_word(s, max_chars)),
        Some(_) => Err(ResponseError::schema(field_path, "expected a string")),
    }
}

fn timestamp_field(obj: &Map<String, Value>, path: &str, key: &str) -> Result<u64, ResponseError> {
    let field_path = format!("{path}.{key}");
    match obj.get(key) {
        None => Err(ResponseError::schema(field_path, "missing field")),
        Some(Value::String(s)) => parse_hms_millis(s.trim())
            .ok_or_else(|| ResponseError::schema(field_path, format!("`{s}` is not an HH:MM:SS.mmm timestamp"))),
        Some(_) => Err(ResponseError::schema(field_path, "expected an HH:MM:SS.mmm string")),
    }
}

/// Parses and checks a stage-one reply.
///
/// Checks run in order: JSON syntax, per-item schema and timestamp grammar,
/// timestamp bounds, then the item count. Over-long labels and summaries are
/// cut at a word boundary. The returned moments are sorted by start time and
/// ranked in that order.
pub fn validate_response(raw: &str, t: &Transcript, spec: &ReelSpec) -> Result<Vec<KeyMoment>, ResponseError> {
    let value = parse_json(raw)?;
    let Value::Array(items) = value else {
        return Err(ResponseError::schema("$", "expected a JSON array of moments"));
    };

    let mut moments = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("[{i}]");
        let Value::Object(obj) = item else {
            return Err(ResponseError::schema(path, "expected an object"));
        };
        let start_ms = timestamp_field(obj, &path, "start")?;
        let end_ms = timestamp_field(obj, &path, "end")?;
        let label = text_field(obj, &path, "label", MAX_LABEL_CHARS)?;
        let summary = text_field(obj, &path, "summary", MAX_SUMMARY_CHARS)?;
        moments.push(KeyMoment {
            rank: 0,
            start_ms,
            end_ms,
            label,
            summary,
        });
    }

    for (i, m) in moments.iter().enumerate() {
        if m.start_ms >= m.end_ms {
            return Err(ResponseError::Range {
                path: format!("[{i}]"),
                message: format!(
                    "start {} is not before end {}",
                    format_hms_millis(m.start_ms),
                    format_hms_millis(m.end_ms)
                ),
            });
        }
        if m.end_ms > t.duration_ms {
            return Err(ResponseError::Range {
                path: format!("[{i}].end"),
                message: format!(
                    "{} is past the end of the video ({})",
                    format_hms_millis(m.end_ms),
                    format_hms_millis(t.duration_ms)
                ),
            });
        }
    }

    if moments.len() != spec.reel_count as usize {
        return Err(ResponseError::Count {
            expected: spec.reel_count,
            found: moments.len(),
        });
    }

    moments.sort_by_key(|m| (m.start_ms, m.end_ms));
    for (rank, m) in moments.iter_mut().enumerate() {
        m.rank = rank as u32;
    }
    Ok(moments)
}

/// Parses and checks a stage-two reply: an object with `label` and `summary`.
pub fn validate_enrichment(raw: &str) -> Result<Enrichment, ResponseError> {
    let value = parse_json(raw)?;
    let Value::Object(obj) = value else {
        return Err(ResponseError::schema("$", "expected a JSON object"));
    };
    Ok(Enrichment {
        label: text_field(&obj, "$", "label", MAX_LABEL_CHARS)?,
        summary: text_field(&obj, "$", "summary", MAX_SUMMARY_CHARS)?,
    })
}

#[derive(Serialize)]
struct WireMoment<'a> {
    start: String,
    end: String,
    label: &'a str,
    summary: &'a str,
}

/// Serializes moments in the stage-one wire format.
pub fn moments_to_wire(moments: &[KeyMoment]) -> String {
    let wire: Vec<WireMoment<'_>> = moments
        .iter()
        .map(|m| WireMoment {
            start: format_hms_millis(m.start_ms),
            end: format_hms_millis(m.end_ms),
            label: &m.label,
            summary: &m.summary,
        })
        .collect();
    serde_json::to_string(&wire).unwrap_or_default()
}
